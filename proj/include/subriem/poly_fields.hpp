#pragma once

#include "subriem/lie_algebra.hpp"
#include "subriem/poly.hpp"
#include "subriem/sr_structure.hpp"

#include <cstddef>
#include <vector>

namespace subriem {

namespace detail {

template <class S>
std::vector<Poly<S>> coordinate_vector(std::size_t n) {
  std::vector<Poly<S>> x;
  for (std::size_t i = 0; i < n; ++i) x.push_back(Poly<S>::variable(n, i));
  return x;
}

template <class S>
std::vector<Poly<S>> constant_vector(const std::vector<S>& v) {
  std::vector<Poly<S>> out;
  for (const auto& c : v) out.emplace_back(c);
  return out;
}

template <class S>
PolyVectorField<S> invariant_field(const LieAlgebra<S>& alg, std::size_t i, int side) {
  std::size_t n = alg.dim();
  auto x = coordinate_vector<S>(n);
  auto e = constant_vector(alg.basis_vector(i));
  auto xe = alg.bracket(x, e);
  auto xxe = alg.bracket(x, xe);
  PolyVectorField<S> out(n);
  S half = ratio<S>(side, 2), twelfth = ratio<S>(1, 12);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = e[k] + Poly<S>(half) * xe[k] + Poly<S>(twelfth) * xxe[k];
    if (out[k].nvars() == 0) out[k] += Poly<S>::monomial(std::vector<int>(n, 0), S(0));
  }
  return out;
}

}  // namespace detail

/// A_i(x) = d/dt (x * exp(t e_i)) at t = 0, in exponential coordinates.
template <class S>
std::vector<PolyVectorField<S>> left_invariant_fields(const LieAlgebra<S>& alg) {
  std::size_t st = alg.nilpotency_step();
  if (st == 0 || st > 4) throw UnsupportedStep("left-invariant fields need a nilpotent algebra of step at most 4");
  std::vector<PolyVectorField<S>> fields;
  for (std::size_t i = 0; i < alg.dim(); ++i) fields.push_back(detail::invariant_field(alg, i, 1));
  return fields;
}

/// d/dt (exp(t e_i) * x) at t = 0.
template <class S>
std::vector<PolyVectorField<S>> right_invariant_fields(const LieAlgebra<S>& alg) {
  std::size_t st = alg.nilpotency_step();
  if (st == 0 || st > 4) throw UnsupportedStep("right-invariant fields need a nilpotent algebra of step at most 4");
  std::vector<PolyVectorField<S>> fields;
  for (std::size_t i = 0; i < alg.dim(); ++i) fields.push_back(detail::invariant_field(alg, i, -1));
  return fields;
}

/// F_a = sum_i B(a,i) A_i.
template <class S>
std::vector<PolyVectorField<S>> combine_fields(const std::vector<PolyVectorField<S>>& fields, const Matrix<S>& b) {
  std::size_t n = fields.size();
  std::vector<PolyVectorField<S>> out(n, PolyVectorField<S>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t i = 0; i < n; ++i) {
      if (is_zero(b(a, i))) continue;
      for (std::size_t k = 0; k < n; ++k) out[a][k] += Poly<S>(b(a, i)) * fields[i][k];
    }
  return out;
}

enum class Taming {
  left_invariant,  // orthonormal left-invariant frame of g
  carnot,          // vertical bundle spanned by right-invariant fields
};

/// Orthonormal horizontal frame and taming frame of a left-invariant structure.
template <class S>
struct PolyFrame {
  std::vector<PolyVectorField<S>> fields;    // left-invariant orthonormal frame, H first
  std::vector<PolyVectorField<S>> vertical;  // vertical frame used by the full Laplacian
  std::size_t nh = 0;
  Matrix<S> basis;

  PolyFrame(const SubRiemannianStructure<S>& srs, Taming taming = Taming::left_invariant)
      : nh(srs.rank()), basis(srs.orthonormal_frame()) {
    fields = combine_fields(left_invariant_fields(srs.algebra), basis);
    std::vector<PolyVectorField<S>> src =
        taming == Taming::carnot ? combine_fields(right_invariant_fields(srs.algebra), basis) : fields;
    for (std::size_t a = nh; a < src.size(); ++a) vertical.push_back(src[a]);
  }
};

template <class S>
Poly<S> sub_laplacian_poly(const PolyFrame<S>& frame, const Poly<S>& f) {
  Poly<S> out;
  for (std::size_t a = 0; a < frame.nh; ++a) out += apply_field(frame.fields[a], apply_field(frame.fields[a], f));
  return out;
}

template <class S>
Poly<S> sub_laplacian_poly(const SubRiemannianStructure<S>& srs, const Poly<S>& f) {
  return sub_laplacian_poly(PolyFrame<S>(srs), f);
}

/// Every frame field is divergence free for Lebesgue measure in exponential
/// coordinates and the frame has unit determinant, so the Laplacian is a sum of squares.
template <class S>
Poly<S> full_laplacian_poly(const PolyFrame<S>& frame, const Poly<S>& f) {
  Poly<S> out = sub_laplacian_poly(frame, f);
  for (const auto& v : frame.vertical) out += apply_field(v, apply_field(v, f));
  return out;
}

template <class S>
Poly<S> full_laplacian_poly(const SubRiemannianStructure<S>& srs, const Poly<S>& f,
                            Taming taming = Taming::left_invariant) {
  return full_laplacian_poly(PolyFrame<S>(srs, taming), f);
}

/// f o delta_s for a stratified algebra.
template <class S>
Poly<S> compose_dilation(const Poly<S>& f, const Stratification& strat, const S& s, std::size_t dim) {
  auto w = strat.weights(dim);
  std::vector<S> scale(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    scale[i] = S(1);
    for (int p = 0; p < w[i]; ++p) scale[i] *= s;
  }
  return f.scale_variables(scale);
}

}  // namespace subriem
