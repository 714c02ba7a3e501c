#pragma once

#include "subriem/poly.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

class ExprError : public std::runtime_error {
 public:
  ExprError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at column " + std::to_string(pos + 1)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

/// Value and gradient with respect to the coordinates.
struct Dual {
  double v = 0;
  std::vector<double> g;
};

/// Scalar expressions over coordinates: + - * / ^int, sin cos exp atan,
/// numbers, parentheses. Variables are the basis names or x1..xn.
class Expr {
 public:
  Expr(const std::string& text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {
    pos_ = 0;
    root_ = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ExprError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
  }

  const std::string& text() const { return text_; }
  std::size_t dim() const { return vars_.size(); }

  double value(const std::vector<double>& x) const { return eval(*root_, x, false).v; }

  Dual eval(const std::vector<double>& x) const { return eval(*root_, x, true); }

  /// Exact polynomial form if the expression uses only + - * ^ and numbers.
  template <class S>
  std::optional<Poly<S>> to_poly() const {
    return poly_of<S>(*root_);
  }

 private:
  enum class Op { num, var, add, sub, mul, div, neg, pow, sin, cos, exp, atan };
  struct Node {
    Op op;
    double num = 0;
    long num_p = 0, num_q = 1;  // rational form of integer/decimal literals
    std::size_t var = 0;
    int power = 0;
    std::unique_ptr<Node> a, b;
  };
  using P = std::unique_ptr<Node>;

  static P make(Op op, P a = nullptr, P b = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  P parse_sum() {
    P l = parse_product();
    for (;;) {
      if (accept('+')) l = make(Op::add, std::move(l), parse_product());
      else if (accept('-')) l = make(Op::sub, std::move(l), parse_product());
      else return l;
    }
  }
  P parse_product() {
    P l = parse_unary();
    for (;;) {
      if (accept('*')) l = make(Op::mul, std::move(l), parse_unary());
      else if (accept('/')) l = make(Op::div, std::move(l), parse_unary());
      else return l;
    }
  }
  P parse_unary() {
    if (accept('-')) return make(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }
  P parse_power() {
    P base = parse_primary();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      bool neg = accept('-');
      skip_ws();
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw ExprError("exponent must be an integer", start);
      int e = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) e = e * 10 + (text_[pos_++] - '0');
      auto n = make(Op::pow, std::move(base));
      n->power = neg ? -e : e;
      return n;
    }
    return base;
  }
  P parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExprError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (accept('(')) {
      P e = parse_sum();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      std::string id = text_.substr(start, pos_ - start);
      static const std::pair<const char*, Op> funcs[] = {
          {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"atan", Op::atan}};
      for (auto [name, op] : funcs)
        if (id == name) {
          if (!accept('(')) throw ExprError("expected '(' after " + id, pos_);
          P arg = parse_sum();
          if (!accept(')')) throw ExprError("expected ')'", pos_);
          return make(op, std::move(arg));
        }
      auto n = make(Op::var);
      n->var = lookup(id, start);
      return n;
    }
    throw ExprError("unexpected '" + std::string(1, c) + "'", pos_);
  }
  P parse_number() {
    std::size_t start = pos_;
    long p = 0, q = 1;
    bool digits = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      p = p * 10 + (text_[pos_++] - '0');
      digits = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        p = p * 10 + (text_[pos_++] - '0');
        q *= 10;
        digits = true;
      }
    }
    if (!digits) throw ExprError("malformed number", start);
    auto n = make(Op::num);
    n->num = static_cast<double>(p) / static_cast<double>(q);
    n->num_p = p;
    n->num_q = q;
    return n;
  }
  std::size_t lookup(const std::string& id, std::size_t at) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == id) return i;
    if (id.size() > 1 && id[0] == 'x') {
      try {
        std::size_t k = std::stoul(id.substr(1));
        if (k >= 1 && k <= vars_.size()) return k - 1;
      } catch (const std::exception&) {
      }
    }
    static const char* xyz[] = {"x", "y", "z", "w"};
    for (std::size_t i = 0; i < 4 && i < vars_.size(); ++i)
      if (id == xyz[i]) return i;
    throw ExprError("unknown variable '" + id + "'", at);
  }

  Dual eval(const Node& n, const std::vector<double>& x, bool grad) const {
    std::size_t d = grad ? vars_.size() : 0;
    auto unary = [&](double v, double dv, const Dual& a) {
      Dual r{v, {}};
      if (grad) {
        r.g.resize(d);
        for (std::size_t i = 0; i < d; ++i) r.g[i] = dv * a.g[i];
      }
      return r;
    };
    switch (n.op) {
      case Op::num: return {n.num, std::vector<double>(d, 0.0)};
      case Op::var: {
        Dual r{x.at(n.var), std::vector<double>(d, 0.0)};
        if (grad) r.g[n.var] = 1;
        return r;
      }
      case Op::neg: {
        Dual a = eval(*n.a, x, grad);
        return unary(-a.v, -1, a);
      }
      case Op::sin: {
        Dual a = eval(*n.a, x, grad);
        return unary(std::sin(a.v), std::cos(a.v), a);
      }
      case Op::cos: {
        Dual a = eval(*n.a, x, grad);
        return unary(std::cos(a.v), -std::sin(a.v), a);
      }
      case Op::exp: {
        Dual a = eval(*n.a, x, grad);
        double e = std::exp(a.v);
        return unary(e, e, a);
      }
      case Op::atan: {
        Dual a = eval(*n.a, x, grad);
        return unary(std::atan(a.v), 1 / (1 + a.v * a.v), a);
      }
      case Op::pow: {
        Dual a = eval(*n.a, x, grad);
        double v = std::pow(a.v, n.power);
        double dv = n.power == 0 ? 0 : n.power * std::pow(a.v, n.power - 1);
        return unary(v, dv, a);
      }
      default: break;
    }
    Dual a = eval(*n.a, x, grad), b = eval(*n.b, x, grad);
    Dual r;
    if (grad) r.g.resize(d);
    switch (n.op) {
      case Op::add:
        r.v = a.v + b.v;
        for (std::size_t i = 0; i < d; ++i) r.g[i] = a.g[i] + b.g[i];
        break;
      case Op::sub:
        r.v = a.v - b.v;
        for (std::size_t i = 0; i < d; ++i) r.g[i] = a.g[i] - b.g[i];
        break;
      case Op::mul:
        r.v = a.v * b.v;
        for (std::size_t i = 0; i < d; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
        break;
      case Op::div:
        r.v = a.v / b.v;
        for (std::size_t i = 0; i < d; ++i) r.g[i] = (a.g[i] * b.v - a.v * b.g[i]) / (b.v * b.v);
        break;
      default: throw std::logic_error("bad expression node");
    }
    return r;
  }

  template <class S>
  std::optional<Poly<S>> poly_of(const Node& n) const {
    std::size_t d = vars_.size();
    switch (n.op) {
      case Op::num: return Poly<S>(S(n.num_p) / S(n.num_q));
      case Op::var: return Poly<S>::variable(d, n.var);
      case Op::neg: {
        auto a = poly_of<S>(*n.a);
        if (!a) return std::nullopt;
        return -*a;
      }
      case Op::pow: {
        if (n.power < 0) return std::nullopt;
        auto a = poly_of<S>(*n.a);
        if (!a) return std::nullopt;
        return a->pow(n.power);
      }
      case Op::add:
      case Op::sub:
      case Op::mul: {
        auto a = poly_of<S>(*n.a), b = poly_of<S>(*n.b);
        if (!a || !b) return std::nullopt;
        if (n.op == Op::add) return *a + *b;
        if (n.op == Op::sub) return *a - *b;
        return *a * *b;
      }
      case Op::div: {
        auto a = poly_of<S>(*n.a), b = poly_of<S>(*n.b);
        if (!a || !b || b->degree() > 0 || b->is_zero()) return std::nullopt;
        return *a * Poly<S>(S(1) / b->constant_term());
      }
      default: return std::nullopt;
    }
  }

  std::string text_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
  std::shared_ptr<Node> root_;
};

}  // namespace subriem
