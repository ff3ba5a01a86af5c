#pragma once

#include <map>
#include <string>
#include <vector>

#include "tldiag/coxeter.hpp"
#include "tldiag/delta_poly.hpp"
#include "tldiag/diagram.hpp"

namespace tldiag {

// Diagrammatic image of generator i: a cup/cap at the generator's column,
// decorated with a dot at the left fork and a circle at the right end.
inline Diagram simple_diagram(const CoxeterSpec& spec, int i) {
  if (i < 0 || i > spec.max_generator())
    throw InvalidInputError("simple_diagram: generator index out of range");
  const int n = spec.n;
  const int k = n + 2;
  int col;          // 1-based left column of the cup
  std::vector<Decor> decor;
  if (spec.family == Family::AffineB) {
    if (i == 0) {
      col = 1;
      decor = {Decor::Dot};
    } else if (i == n + 1) {
      col = n + 1;
      decor = {Decor::Circ};
    } else {
      col = i;
    }
  } else {
    if (i == 0) {
      col = 1;
      decor = {Decor::Dot};
    } else if (i == n + 2) {
      col = n + 1;
      decor = {Decor::Circ};
    } else {
      col = i;
    }
  }
  Diagram d;
  d.family = spec.family;
  d.n = n;
  d.edges.push_back({col - 1, col, decor});               // north cup
  d.edges.push_back({k + col - 1, k + col, decor});       // south cap
  for (int c = 1; c <= k; ++c)
    if (c != col && c != col + 1) d.edges.push_back({c - 1, c - 1 + k, {}});
  std::sort(d.edges.begin(), d.edges.end(),
            [](const DiagEdge& e, const DiagEdge& f) {
              return std::make_pair(e.a, e.b) < std::make_pair(f.a, f.b);
            });
  return d;
}

// Finite Z[delta]-linear combination of canonical diagrams.
class AlgebraElement {
 public:
  struct Term {
    Diagram diagram;
    DeltaPoly coeff;
  };

  AlgebraElement() = default;
  AlgebraElement(Family fam, int n) : family_(fam), n_(n) {}

  static AlgebraElement zero(const CoxeterSpec& spec) {
    return AlgebraElement(spec.family, spec.n);
  }
  static AlgebraElement unit(const CoxeterSpec& spec) {
    AlgebraElement e(spec.family, spec.n);
    e.add(identity_diagram(spec.family, spec.n), DeltaPoly(1));
    return e;
  }
  static AlgebraElement from_diagram(const Diagram& d, DeltaPoly c = DeltaPoly(1)) {
    AlgebraElement e(d.family, d.n);
    e.add(d, std::move(c));
    return e;
  }

  Family family() const { return family_; }
  int n() const { return n_; }
  const std::map<std::string, Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }

  void add(const Diagram& d, DeltaPoly c) {
    if (c.is_zero()) return;
    auto key = d.key();
    auto it = terms_.find(key);
    if (it == terms_.end()) {
      terms_.emplace(key, Term{d, std::move(c)});
    } else {
      it->second.coeff += c;
      if (it->second.coeff.is_zero()) terms_.erase(it);
    }
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    for (const auto& [k, t] : o.terms_) add(t.diagram, t.coeff);
    return *this;
  }
  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) {
    return a += b;
  }
  AlgebraElement& scale(const DeltaPoly& c) {
    std::map<std::string, Term> out;
    for (auto& [k, t] : terms_) {
      DeltaPoly nc = t.coeff * c;
      if (!nc.is_zero()) out.emplace(k, Term{t.diagram, nc});
    }
    terms_ = std::move(out);
    return *this;
  }

  bool operator==(const AlgebraElement& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (const auto& [k, t] : terms_) {
      auto it = o.terms_.find(k);
      if (it == o.terms_.end() || !(it->second.coeff == t.coeff)) return false;
    }
    return true;
  }
  bool operator!=(const AlgebraElement& o) const { return !(*this == o); }

 private:
  Family family_ = Family::AffineB;
  int n_ = 2;
  std::map<std::string, Term> terms_;
};

// Bilinear extension of the concatenation product.
inline AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.family() != y.family() || x.n() != y.n())
    throw InvalidInputError("multiply: elements of different algebras");
  AlgebraElement out(x.family(), x.n());
  for (const auto& [kx, tx] : x.terms())
    for (const auto& [ky, ty] : y.terms()) {
      Reduction r = diagram_product(tx.diagram, ty.diagram);
      DeltaPoly c = tx.coeff * ty.coeff * r.coeff;
      out.add(r.diagram, std::move(c));
    }
  return out;
}

// D_w as a single diagram: fold the simple diagrams of a reduced FC word.
// Asserts that no scalar or delta factor appears along the way.
inline Diagram theta_diagram(const Word& w, const CoxeterSpec& spec) {
  if (!is_fully_commutative(w, spec))  // throws NotReducedError when not reduced
    throw NotFCError("theta: word " + word_to_string(w) + " is not fully commutative");
  Diagram acc = identity_diagram(spec);
  for (int g : w) {
    Reduction r = diagram_product(acc, simple_diagram(spec, g));
    if (!r.coeff.is_one())
      throw InternalAssertionError("theta: scalar factor " + r.coeff.to_string() +
                                   " appeared on FC input " + word_to_string(w));
    acc = std::move(r.diagram);
  }
  return acc;
}

// theta as an algebra element (single term, coefficient 1).
inline AlgebraElement theta(const Word& w, const CoxeterSpec& spec) {
  return AlgebraElement::from_diagram(theta_diagram(w, spec));
}

// --- presentation check --------------------------------------------------------

struct RelationCheck {
  std::string name;
  bool pass = false;
};

struct PresentationReport {
  CoxeterSpec spec;
  std::vector<RelationCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

// Evaluates every defining relation of the presentation as an exact
// AlgebraElement identity.
inline PresentationReport check_presentation(const CoxeterSpec& spec) {
  PresentationReport rep;
  rep.spec = spec;
  const int g = spec.num_generators();
  auto D = [&](int i) { return AlgebraElement::from_diagram(simple_diagram(spec, i)); };
  auto name = [&](const char* rel, int i, int j) {
    return std::string(rel) + "(" + std::to_string(i) +
           (j >= 0 ? "," + std::to_string(j) : "") + ")";
  };
  auto mul = [](std::vector<AlgebraElement> xs) {
    AlgebraElement acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = multiply(acc, xs[i]);
    return acc;
  };
  const char* r1 = spec.family == Family::AffineB ? "b1" : "d1";
  const char* r2 = spec.family == Family::AffineB ? "b2" : "d2";
  const char* r3 = spec.family == Family::AffineB ? "b3" : "d3";
  for (int i = 0; i < g; ++i) {
    AlgebraElement lhs = mul({D(i), D(i)});
    AlgebraElement rhs = D(i);
    rhs.scale(DeltaPoly::delta());
    rep.checks.push_back({name(r1, i, -1), lhs == rhs});
  }
  for (int i = 0; i < g; ++i)
    for (int j = i + 1; j < g; ++j) {
      int m = bond(spec, i, j);
      if (m == 2) {
        rep.checks.push_back({name(r2, i, j), mul({D(i), D(j)}) == mul({D(j), D(i)})});
      } else if (m == 3) {
        rep.checks.push_back({name(r3, i, j), mul({D(i), D(j), D(i)}) == D(i)});
        rep.checks.push_back({name(r3, j, i), mul({D(j), D(i), D(j)}) == D(j)});
      } else if (m == 4) {
        AlgebraElement r = mul({D(i), D(j)});
        r.scale(DeltaPoly(2));
        AlgebraElement rr = mul({D(j), D(i)});
        rr.scale(DeltaPoly(2));
        rep.checks.push_back({name("b4", i, j), mul({D(i), D(j), D(i), D(j)}) == r});
        rep.checks.push_back({name("b4", j, i), mul({D(j), D(i), D(j), D(i)}) == rr});
      }
    }
  return rep;
}

}  // namespace tldiag
