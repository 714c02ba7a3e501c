#pragma once

#include "subriem/lie_algebra.hpp"
#include "subriem/scalar.hpp"
#include "subriem/sr_structure.hpp"
#include "subriem/tensor.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

/// Located diagnostic: 1-based line and column.
class SpecParseError : public std::runtime_error {
 public:
  SpecParseError(std::size_t line, std::size_t column, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

struct SpecBracket {
  std::size_t i, j, k;  // 0-based
  Rational value;
  bool operator==(const SpecBracket&) const = default;
};

struct SpecFrame {
  std::string kind;     // "warped_su2"
  std::string profile;  // see profiles::names()
  std::vector<double> c_grid;
  bool operator==(const SpecFrame&) const = default;
};

/// Contents of a group spec file. Indices are stored 0-based and written
/// 1-based.
struct GroupSpec {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> basis;
  std::vector<SpecBracket> brackets;
  std::optional<std::vector<std::vector<std::size_t>>> layers;
  std::vector<std::size_t> horizontal;
  std::optional<std::vector<std::vector<Rational>>> gram_h, gram_full;  // nullopt: orthonormal
  std::optional<SpecFrame> frame;

  bool operator==(const GroupSpec&) const = default;

  bool has_algebra() const { return dim > 0; }
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == '=' || line[i] == ',') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '=' && line[i] != ',')
      ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline Rational parse_rational(const Token& t, std::size_t line) {
  const std::string& s = t.text;
  auto bad = [&] { return SpecParseError(line, t.column, "expected a rational number, got '" + s + "'"); };
  if (s.empty()) throw bad();
  std::size_t pos = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    pos = 1;
  }
  std::string body = s.substr(pos);
  if (body.empty()) throw bad();
  auto digits = [](const std::string& d) {
    return !d.empty() && std::all_of(d.begin(), d.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  };
  Rational r;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string a = body.substr(0, slash), b = body.substr(slash + 1);
    if (!digits(a) || !digits(b)) throw bad();
    if (std::all_of(b.begin(), b.end(), [](char c) { return c == '0'; }))
      throw SpecParseError(line, t.column, "zero denominator in '" + s + "'");
    r = Rational(a) / Rational(b);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    std::string a = body.substr(0, dot), b = body.substr(dot + 1);
    if ((!a.empty() && !digits(a)) || (!b.empty() && !digits(b)) || (a.empty() && b.empty())) throw bad();
    std::string den = "1" + std::string(b.size(), '0');
    r = Rational((a.empty() ? "0" : a) + b) / Rational(den);
  } else {
    if (!digits(body)) throw bad();
    r = Rational(body);
  }
  return neg ? Rational(-r) : r;
}

inline double parse_real(const Token& t, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(t.text, &used);
    if (used != t.text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw SpecParseError(line, t.column, "expected a real number, got '" + t.text + "'");
  }
}

inline std::size_t parse_index(const Token& t, std::size_t line, std::size_t dim) {
  if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw SpecParseError(line, t.column, "expected a 1-based index, got '" + t.text + "'");
  std::size_t v = 0;
  for (char c : t.text) {
    v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v > 1000000) break;
  }
  if (v < 1 || v > dim)
    throw SpecParseError(line, t.column, "index " + t.text + " out of range 1.." + std::to_string(dim));
  return v - 1;
}

}  // namespace detail

/// Line-oriented format:
///   name <text>
///   [algebra]        dim N / basis n1 .. nN / bracket i j k value
///   [stratification] layer i ...   (one line per layer)
///   [metric]         horizontal i ... / gram_h orthonormal | row ... / gram_full orthonormal | row ...
///   [frame]          kind warped_su2 / profile name / c v1 v2 ...
/// '#' starts a comment.
inline GroupSpec parse_spec(const std::string& text) {
  using detail::Token;
  GroupSpec spec;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  bool seen_dim = false;
  std::optional<std::size_t> gram_h_line, gram_full_line;
  std::vector<std::vector<Rational>> gh_rows, gf_rows;
  bool gh_ortho = false, gf_ortho = false;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = detail::tokenize(raw);
    if (toks.empty()) continue;
    const Token& head = toks[0];
    if (head.text.front() == '[') {
      if (head.text.back() != ']' || toks.size() != 1)
        throw SpecParseError(lineno, head.column, "malformed section header");
      section = head.text.substr(1, head.text.size() - 2);
      if (section != "algebra" && section != "stratification" && section != "metric" && section != "frame")
        throw SpecParseError(lineno, head.column + 1, "unknown section '" + section + "'");
      continue;
    }
    auto need = [&](std::size_t count) {
      if (toks.size() < count)
        throw SpecParseError(lineno, raw.size() + 1, "'" + head.text + "' needs " + std::to_string(count - 1) + " value(s)");
    };
    auto exact = [&](std::size_t count) {
      need(count);
      if (toks.size() > count) throw SpecParseError(lineno, toks[count].column, "unexpected '" + toks[count].text + "'");
    };
    auto require_dim = [&] {
      if (!seen_dim) throw SpecParseError(lineno, head.column, "'dim' must come before '" + head.text + "'");
    };
    if (section.empty()) {
      if (head.text != "name") throw SpecParseError(lineno, head.column, "expected a section header or 'name'");
      std::string rest = raw.substr(raw.find("name") + 4);
      auto b = rest.find_first_not_of(" \t=");
      auto e = rest.find_last_not_of(" \t\r");
      spec.name = b == std::string::npos ? "" : rest.substr(b, e - b + 1);
      continue;
    }
    if (section == "algebra") {
      if (head.text == "dim") {
        exact(2);
        std::size_t d = 0;
        try {
          d = std::stoul(toks[1].text);
        } catch (const std::exception&) {
        }
        if (d == 0 || d > 64) throw SpecParseError(lineno, toks[1].column, "dim must be an integer in 1..64");
        spec.dim = d;
        seen_dim = true;
      } else if (head.text == "basis") {
        require_dim();
        exact(spec.dim + 1);
        spec.basis.clear();
        for (std::size_t i = 1; i < toks.size(); ++i) {
          const auto& name = toks[i].text;
          if (!std::isalpha(static_cast<unsigned char>(name[0])))
            throw SpecParseError(lineno, toks[i].column, "basis names must start with a letter");
          spec.basis.push_back(name);
        }
      } else if (head.text == "bracket") {
        require_dim();
        exact(5);
        SpecBracket b{detail::parse_index(toks[1], lineno, spec.dim), detail::parse_index(toks[2], lineno, spec.dim),
                      detail::parse_index(toks[3], lineno, spec.dim), detail::parse_rational(toks[4], lineno)};
        if (b.i == b.j) throw SpecParseError(lineno, toks[2].column, "bracket of a basis vector with itself");
        spec.brackets.push_back(b);
      } else {
        throw SpecParseError(lineno, head.column, "unknown key '" + head.text + "' in [algebra]");
      }
    } else if (section == "stratification") {
      if (head.text != "layer") throw SpecParseError(lineno, head.column, "expected 'layer'");
      require_dim();
      need(2);
      if (!spec.layers) spec.layers.emplace();
      std::vector<std::size_t> layer;
      for (std::size_t i = 1; i < toks.size(); ++i) layer.push_back(detail::parse_index(toks[i], lineno, spec.dim));
      spec.layers->push_back(layer);
    } else if (section == "metric") {
      require_dim();
      if (head.text == "horizontal") {
        need(2);
        spec.horizontal.clear();
        for (std::size_t i = 1; i < toks.size(); ++i)
          spec.horizontal.push_back(detail::parse_index(toks[i], lineno, spec.dim));
      } else if (head.text == "gram_h" || head.text == "gram_full") {
        bool h = head.text == "gram_h";
        need(2);
        (h ? gram_h_line : gram_full_line) = lineno;
        if (toks.size() == 2 && toks[1].text == "orthonormal") {
          (h ? gh_ortho : gf_ortho) = true;
        } else {
          std::vector<Rational> row;
          for (std::size_t i = 1; i < toks.size(); ++i) row.push_back(detail::parse_rational(toks[i], lineno));
          (h ? gh_rows : gf_rows).push_back(row);
        }
      } else {
        throw SpecParseError(lineno, head.column, "unknown key '" + head.text + "' in [metric]");
      }
    } else if (section == "frame") {
      if (!spec.frame) spec.frame.emplace();
      if (head.text == "kind") {
        exact(2);
        if (toks[1].text != "warped_su2") throw SpecParseError(lineno, toks[1].column, "unknown frame kind '" + toks[1].text + "'");
        spec.frame->kind = toks[1].text;
      } else if (head.text == "profile") {
        exact(2);
        const auto& p = toks[1].text;
        if (p != "zero" && p != "arctan" && p != "sin")
          throw SpecParseError(lineno, toks[1].column, "unknown profile '" + p + "' (known: zero, arctan, sin)");
        spec.frame->profile = p;
      } else if (head.text == "c") {
        need(2);
        spec.frame->c_grid.clear();
        for (std::size_t i = 1; i < toks.size(); ++i) spec.frame->c_grid.push_back(detail::parse_real(toks[i], lineno));
      } else {
        throw SpecParseError(lineno, head.column, "unknown key '" + head.text + "' in [frame]");
      }
    }
  }
  ++lineno;
  if (!spec.has_algebra() && !spec.frame) throw SpecParseError(lineno, 1, "spec has neither [algebra] nor [frame]");
  if (spec.frame && (spec.frame->kind.empty() || spec.frame->profile.empty()))
    throw SpecParseError(lineno, 1, "[frame] needs 'kind' and 'profile'");
  if (spec.has_algebra()) {
    if (spec.basis.empty())
      for (std::size_t i = 0; i < spec.dim; ++i) spec.basis.push_back("e" + std::to_string(i + 1));
    if (spec.horizontal.empty()) {
      if (spec.layers) spec.horizontal = spec.layers->front();
      else throw SpecParseError(lineno, 1, "[metric] horizontal is required without a stratification");
    }
    auto check_gram = [&](bool ortho, std::vector<std::vector<Rational>>& rows, std::size_t size,
                          std::optional<std::size_t> at, std::optional<std::vector<std::vector<Rational>>>& dst) {
      if (ortho || rows.empty()) return;
      if (rows.size() != size) throw SpecParseError(*at, 1, "Gram matrix needs " + std::to_string(size) + " rows");
      for (const auto& r : rows)
        if (r.size() != size) throw SpecParseError(*at, 1, "Gram row needs " + std::to_string(size) + " entries");
      dst = rows;
    };
    check_gram(gh_ortho, gh_rows, spec.horizontal.size(), gram_h_line, spec.gram_h);
    check_gram(gf_ortho, gf_rows, spec.dim, gram_full_line, spec.gram_full);
  }
  return spec;
}

inline std::string serialize_spec(const GroupSpec& spec) {
  std::ostringstream os;
  if (!spec.name.empty()) os << "name " << spec.name << "\n";
  if (spec.has_algebra()) {
    os << "[algebra]\ndim " << spec.dim << "\nbasis";
    for (const auto& b : spec.basis) os << " " << b;
    os << "\n";
    for (const auto& b : spec.brackets) os << "bracket " << b.i + 1 << " " << b.j + 1 << " " << b.k + 1 << " " << b.value.str() << "\n";
    if (spec.layers) {
      os << "[stratification]\n";
      for (const auto& l : *spec.layers) {
        os << "layer";
        for (auto i : l) os << " " << i + 1;
        os << "\n";
      }
    }
    os << "[metric]\nhorizontal";
    for (auto i : spec.horizontal) os << " " << i + 1;
    os << "\n";
    auto gram = [&](const char* key, const std::optional<std::vector<std::vector<Rational>>>& g) {
      if (!g) {
        os << key << " orthonormal\n";
        return;
      }
      for (const auto& r : *g) {
        os << key;
        for (const auto& v : r) os << " " << v.str();
        os << "\n";
      }
    };
    gram("gram_h", spec.gram_h);
    gram("gram_full", spec.gram_full);
  }
  if (spec.frame) {
    os << "[frame]\nkind " << spec.frame->kind << "\nprofile " << spec.frame->profile << "\n";
    if (!spec.frame->c_grid.empty()) {
      os << "c";
      os.precision(17);
      for (double c : spec.frame->c_grid) os << " " << c;
      os << "\n";
    }
  }
  return os.str();
}

inline LieAlgebra<Rational> build_algebra(const GroupSpec& spec) {
  if (!spec.has_algebra()) throw std::invalid_argument("spec has no [algebra] section");
  LieAlgebra<Rational> alg(spec.dim, spec.basis);
  for (const auto& b : spec.brackets) alg.set_bracket(b.i, b.j, b.k, b.value);
  return alg;
}

inline std::optional<Stratification> build_stratification(const GroupSpec& spec) {
  if (!spec.layers) return std::nullopt;
  return Stratification{*spec.layers};
}

inline SubRiemannianStructure<Rational> build_structure(const GroupSpec& spec) {
  auto s = SubRiemannianStructure<Rational>::orthonormal(build_algebra(spec), spec.horizontal, build_stratification(spec));
  auto fill = [](const std::vector<std::vector<Rational>>& rows) {
    Matrix<Rational> m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    return m;
  };
  if (spec.gram_h) s.gram_h = fill(*spec.gram_h);
  if (spec.gram_full) s.gram_full = fill(*spec.gram_full);
  return s;
}

/// FNV-1a 64-bit hash, used to tag specs in run manifests.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace subriem
