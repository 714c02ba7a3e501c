#pragma once

#include "subriem/jet.hpp"
#include "subriem/lie_algebra.hpp"
#include "subriem/sr_structure.hpp"
#include "subriem/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

/// Orthonormal frame E_0..E_{N-1} at one base point, horizontal vectors
/// first. c(i,j,k) are the structure functions [E_i,E_j] = sum c_ij^k E_k
/// as first-order jets, so E_l(c_ij^k) is available.
template <class S>
struct FramePoint {
  std::size_t n = 0;
  std::size_t nh = 0;
  Tensor3<Jet<S>> c;
  std::vector<std::string> names;

  bool horizontal(std::size_t i) const { return i < nh; }
  bool vertical(std::size_t i) const { return i >= nh; }
};

/// Transports the structure constants to the orthonormal frame F = B e.
template <class S>
FramePoint<S> frame_from_algebra(const LieAlgebra<S>& alg, const Matrix<S>& b, std::size_t nh) {
  std::size_t n = alg.dim();
  auto binv = inverse_exact(b);
  FramePoint<S> fp;
  fp.n = n;
  fp.nh = nh;
  fp.c = Tensor3<Jet<S>>(n);
  std::vector<std::vector<S>> rows(n);
  for (std::size_t a = 0; a < n; ++a) {
    rows[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) rows[a][i] = b(a, i);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t bb = 0; bb < n; ++bb) {
      auto br = alg.bracket(rows[a], rows[bb]);
      // components of br on F: br = sum_k br_k e_k, e_k = sum_c binv(k,c) F_c
      for (std::size_t cc = 0; cc < n; ++cc) {
        S acc(0);
        for (std::size_t k = 0; k < n; ++k) acc += br[k] * binv(k, cc);
        fp.c(a, bb, cc) = Jet<S>(acc);
      }
    }
  for (std::size_t a = 0; a < n; ++a) fp.names.push_back("F" + std::to_string(a + 1));
  return fp;
}

template <class S>
FramePoint<S> frame_from_structure(const SubRiemannianStructure<S>& srs) {
  return frame_from_algebra(srs.algebra, srs.orthonormal_frame(), srs.rank());
}

/// A function of the base parameter c with two derivatives.
struct Profile {
  std::string name;
  std::function<double(double)> f, df, ddf;
};

namespace profiles {

inline Profile zero() {
  return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

/// f(c) = -c atan(c): bounded above, unbounded below, f' and f'' bounded.
inline Profile arctan() {
  return {"arctan", [](double c) { return -c * std::atan(c); },
          [](double c) { return -std::atan(c) - c / (1 + c * c); },
          [](double c) {
            double q = 1 + c * c;
            return -1 / q - (1 - c * c) / (q * q);
          }};
}

inline Profile sine() {
  return {"sin", [](double c) { return std::sin(c); }, [](double c) { return std::cos(c); },
          [](double c) { return -std::sin(c); }};
}

inline Profile by_name(const std::string& name) {
  if (name == "zero") return zero();
  if (name == "arctan") return arctan();
  if (name == "sin") return sine();
  throw std::invalid_argument("unknown profile '" + name + "' (known: zero, arctan, sin)");
}

inline std::vector<std::string> names() { return {"zero", "arctan", "sin"}; }

}  // namespace profiles

/// Frame on SU(2) x SU(2) x R built from the symmetric and antisymmetric
/// combinations A_k^s, A_k^a and the coordinate field d/dc:
///   E1 = e^f A1^s, E2 = e^f A2^s, E3 = e^f A1^a, E4 = d/dc   (horizontal)
///   E5 = A3^s, E6 = A2^a, E7 = A3^a                          (vertical)
/// with f = f(c). The frame is orthonormal for the metric of the example.
class WarpedSu2Frame {
 public:
  explicit WarpedSu2Frame(Profile p) : p_(std::move(p)) {
    auto su = builtin::su2<double>();
    // group slots: (kind, su2 index, warp weight), kind 0 = s, 1 = a
    slots_ = {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {-1, 0, 0}, {0, 2, 0}, {1, 1, 0}, {1, 2, 0}};
    group_c_ = Tensor3<double>(7);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        if (slots_[i].kind < 0 || slots_[j].kind < 0) continue;
        int kind = slots_[i].kind ^ slots_[j].kind;  // s*s=s, s*a=a, a*a=s
        for (std::size_t k = 0; k < 3; ++k) {
          double v = su.c(slots_[i].idx, slots_[j].idx, k);
          if (v == 0) continue;
          group_c_(i, j, slot_of(kind, k)) += v;
        }
      }
  }

  const Profile& profile() const { return p_; }
  static constexpr std::size_t size = 7;
  static constexpr std::size_t rank = 4;
  static constexpr std::size_t base_direction = 3;

  /// Brackets of the unwarped group fields in the slot basis.
  double group_constant(std::size_t i, std::size_t j, std::size_t k) const { return group_c_(i, j, k); }

  FramePoint<double> at(double c) const {
    double f = p_.f(c), df = p_.df(c), ddf = p_.ddf(c);
    FramePoint<double> fp;
    fp.n = 7;
    fp.nh = 4;
    fp.c = Tensor3<Jet<double>>(7);
    fp.names = {"Z1", "Z2", "Z3", "dc", "A3s", "A2a", "A3a"};
    auto jet = [&](double v, double dv) {
      std::vector<double> d(7, 0.0);
      d[base_direction] = dv;  // only d/dc moves the base coordinate
      return Jet<double>(v, d);
    };
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j)
        for (std::size_t k = 0; k < 7; ++k) {
          double g = group_c_(i, j, k);
          if (g == 0) continue;
          double w = slots_[i].warp + slots_[j].warp - slots_[k].warp;
          double e = std::exp(w * f);
          fp.c(i, j, k) = jet(g * e, g * w * df * e);
        }
    for (std::size_t i = 0; i < 7; ++i) {
      double w = slots_[i].warp;
      if (w == 0 || i == base_direction) continue;
      fp.c(base_direction, i, i) = jet(w * df, w * ddf);
      fp.c(i, base_direction, i) = jet(-w * df, -w * ddf);
    }
    return fp;
  }

 private:
  struct Slot {
    int kind;
    std::size_t idx;
    double warp;
  };
  std::size_t slot_of(int kind, std::size_t idx) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].kind == kind && slots_[i].idx == idx) return i;
    throw std::logic_error("missing slot");
  }

  Profile p_;
  std::vector<Slot> slots_;
  Tensor3<double> group_c_;
};

/// Jacobi identity for a frame with structure functions:
/// sum_cyc ( E_i(c_jl^m) + sum_p c_jl^p c_ip^m ) = 0.
template <class S>
double frame_jacobi_residual(const FramePoint<S>& fp) {
  double worst = 0;
  std::size_t n = fp.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t m = 0; m < n; ++m) {
          S acc(0);
          std::size_t idx[3] = {i, j, l};
          for (int r = 0; r < 3; ++r) {
            std::size_t a = idx[r], b = idx[(r + 1) % 3], cc = idx[(r + 2) % 3];
            acc += fp.c(b, cc, m).deriv(a);
            for (std::size_t p = 0; p < n; ++p) acc += fp.c(b, cc, p).value() * fp.c(a, p, m).value();
          }
          worst = std::max(worst, std::abs(to_double(acc)));
        }
  return worst;
}

}  // namespace subriem
