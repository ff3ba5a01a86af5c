#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tldiag/coxeter.hpp"
#include "tldiag/delta_poly.hpp"
#include "tldiag/errors.hpp"

namespace tldiag {

// Decorations: Dot is the L-decoration, Circ and Tri are R-decorations.
// Tri exists only in family B.
enum class Decor : uint8_t { Dot, Circ, Tri };

inline const char* decor_name(Decor d) {
  switch (d) {
    case Decor::Dot: return "dot";
    case Decor::Circ: return "circ";
    case Decor::Tri: return "tri";
  }
  return "?";
}

inline bool is_left_decor(Decor d) { return d == Decor::Dot; }
inline bool is_right_decor(Decor d) { return !is_left_decor(d); }

// Nodes of the standard k-box: north face 0..k-1 (columns 1..k), south face
// k..2k-1 (columns 1..k).
struct DiagEdge {
  int a = 0, b = 0;                 // node ids, a < b
  std::vector<Decor> seq;           // reading order: left-right (non-prop),
                                    // top-down (propagating)
  bool operator==(const DiagEdge& o) const { return a == o.a && b == o.b && seq == o.seq; }
};

struct DiagLoop {
  std::vector<Decor> word;          // canonical cyclic form
  bool operator==(const DiagLoop& o) const { return word == o.word; }
};

// One decoration instance on a propagating edge or loop; mid-order entries
// are listed from top to bottom.  Meaningful only when a(D) = 1.
struct MidEvent {
  bool on_loop = false;
  int idx = 0;   // index into edges or loops
  int pos = 0;   // position in the carrier's seq/word
  bool operator==(const MidEvent& o) const {
    return on_loop == o.on_loop && idx == o.idx && pos == o.pos;
  }
};

namespace detail {
inline std::vector<Decor> canonical_cycle(std::vector<Decor> w) {
  if (w.size() <= 1) return w;
  std::vector<Decor> best = w;
  for (int dir = 0; dir < 2; ++dir) {
    for (size_t r = 0; r < w.size(); ++r) {
      std::vector<Decor> cand(w.begin() + r, w.end());
      cand.insert(cand.end(), w.begin(), w.begin() + r);
      if (cand < best) best = cand;
    }
    std::reverse(w.begin(), w.end());
  }
  return best;
}
}  // namespace detail

// A reduced, canonical LR-decorated pseudo-diagram on the (n+2)-box.
// Instances are produced by the builders below or by reduce(); all values
// are immutable after construction.
class Diagram {
 public:
  Family family = Family::AffineB;
  int n = 2;
  std::vector<DiagEdge> edges;   // sorted by (a, b)
  std::vector<DiagLoop> loops;
  std::vector<MidEvent> mid;     // only when a(D) == 1, else empty

  Diagram() = default;

  int k() const { return n + 2; }
  bool is_north_node(int v) const { return v < k(); }
  int node_col(int v) const { return v < k() ? v + 1 : v - k() + 1; }

  static bool edge_is_prop(const DiagEdge& e, int k) { return e.a < k && e.b >= k; }
  static bool edge_is_north(const DiagEdge& e, int k) { return e.b < k; }
  static bool edge_is_south(const DiagEdge& e, int k) { return e.a >= k; }

  int a_count() const {
    int c = 0;
    for (const auto& e : edges)
      if (edge_is_north(e, k())) ++c;
    return c;
  }
  bool is_undammed() const {
    for (const auto& e : edges)
      if (edge_is_prop(e, k())) return false;
    return true;
  }
  bool is_identity() const {
    if (!loops.empty()) return false;
    for (const auto& e : edges)
      if (e.b != e.a + k() || !e.seq.empty()) return false;
    return true;
  }

  const DiagEdge* edge_at(int node) const {
    for (const auto& e : edges)
      if (e.a == node || e.b == node) return &e;
    return nullptr;
  }
  int edge_index_at(int node) const {
    for (size_t i = 0; i < edges.size(); ++i)
      if (edges[i].a == node || edges[i].b == node) return (int)i;
    return -1;
  }

  std::string key() const {
    std::string s = family_name(family);
    s += std::to_string(n) + ";";
    for (const auto& e : edges) {
      s += std::to_string(e.a) + "-" + std::to_string(e.b) + ":";
      for (Decor d : e.seq) s += decor_name(d)[0];
      s += ",";
    }
    s += "|";
    for (const auto& l : loops) {
      s += "L";
      for (Decor d : l.word) s += decor_name(d)[0];
      s += ",";
    }
    if (a_count() == 1) {
      s += "|m";
      for (const auto& ev : mid)
        s += (ev.on_loop ? "l" : "e") + std::to_string(ev.idx) + "." +
             std::to_string(ev.pos) + ";";
    }
    return s;
  }
  bool operator==(const Diagram& o) const { return key() == o.key(); }
  bool operator!=(const Diagram& o) const { return !(*this == o); }
  bool operator<(const Diagram& o) const { return key() < o.key(); }
};

inline std::string canonical_key(const Diagram& d) { return d.key(); }

// --- planarity and wall exposure --------------------------------------------

namespace detail {

// Boundary circle position: north 1..k left to right, then south k..1
// right to left.  The west gap sits between positions 2k-1 and 0, the east
// gap between k-1 and k.
inline int boundary_pos(int node, int k) {
  return node < k ? node : k + (2 * k - 1 - node);
}

inline bool chords_cross(const DiagEdge& e, const DiagEdge& f, int k) {
  int a = boundary_pos(e.a, k), b = boundary_pos(e.b, k);
  int c = boundary_pos(f.a, k), d = boundary_pos(f.b, k);
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  bool c_in = a < c && c < b, d_in = a < d && d < b;
  return c_in != d_in;
}

// True when chord f separates edge e from the boundary gap at fractional
// position `gap` (west: -0.5, east: k-0.5).
inline bool separates(const DiagEdge& f, const DiagEdge& e, double gap, int k) {
  double p1 = boundary_pos(f.a, k), p2 = boundary_pos(f.b, k);
  if (p1 > p2) std::swap(p1, p2);
  auto inside = [&](double x) { return p1 < x && x < p2; };
  bool ea = inside(boundary_pos(e.a, k)), eb = inside(boundary_pos(e.b, k));
  bool g = inside(gap);
  return ea && eb == ea && g != ea;
}

}  // namespace detail

inline bool planar(const Diagram& d) {
  for (size_t i = 0; i < d.edges.size(); ++i)
    for (size_t j = i + 1; j < d.edges.size(); ++j)
      if (detail::chords_cross(d.edges[i], d.edges[j], d.k())) return false;
  return true;
}

// An edge is left (right) exposed when no other edge separates it from the
// west (east) wall of the box; decorations may then slide to that wall.
inline bool left_exposed(const Diagram& d, const DiagEdge& e) {
  for (const auto& f : d.edges) {
    if (&f == &e) continue;
    if (detail::separates(f, e, -0.5, d.k())) return false;
  }
  return true;
}
inline bool right_exposed(const Diagram& d, const DiagEdge& e) {
  for (const auto& f : d.edges) {
    if (&f == &e) continue;
    if (detail::separates(f, e, d.k() - 0.5, d.k())) return false;
  }
  return true;
}

// --- builders ----------------------------------------------------------------

inline Diagram identity_diagram(Family family, int n) {
  Diagram d;
  d.family = family;
  d.n = n;
  for (int i = 0; i < d.k(); ++i) d.edges.push_back({i, i + d.k(), {}});
  return d;
}
inline Diagram identity_diagram(const CoxeterSpec& spec) {
  return identity_diagram(spec.family, spec.n);
}

// --- raw (pre-reduction) form and the rewrite engine -------------------------

struct RankedDecor {
  Decor d;
  long long rank;  // global top-to-bottom height rank
};

struct RawEdge {
  int a, b;
  std::vector<RankedDecor> seq;
};
struct RawLoop {
  std::vector<RankedDecor> word;
};

// A concrete decorated diagram before applying the defining relations.
struct RawDiagram {
  Family family = Family::AffineB;
  int n = 2;
  std::vector<RawEdge> edges;
  std::vector<RawLoop> loops;
  int k() const { return n + 2; }
};

struct Reduction {
  Diagram diagram;
  DeltaPoly coeff = DeltaPoly(1);
};

inline size_t rewrite_step_cap() {
  if (const char* env = std::getenv("TLDIAG_STEP_CAP")) {
    long v = std::atol(env);
    if (v > 0) return (size_t)v;
  }
  return 200000;
}

namespace detail {

// Pair rules applied to adjacent decorations of one block.  Returns the
// replacement (0 or 1 decorations) and multiplies the scalar factor.
inline bool pair_rule(Family fam, Decor x, Decor y, std::vector<Decor>& repl,
                      long long& scalar) {
  repl.clear();
  scalar = 1;
  if (x == Decor::Dot && y == Decor::Dot) return true;  // .. -> empty
  if (fam == Family::AffineB) {
    if (x == Decor::Circ && y == Decor::Circ) {
      repl = {Decor::Tri};
      return true;
    }
    if (x == Decor::Tri && y == Decor::Tri) {
      repl = {Decor::Tri};
      scalar = 2;
      return true;
    }
    if ((x == Decor::Circ && y == Decor::Tri) || (x == Decor::Tri && y == Decor::Circ)) {
      repl = {Decor::Circ};
      scalar = 2;
      return true;
    }
    return false;
  }
  if (x == Decor::Circ && y == Decor::Circ) return true;  // oo -> empty
  return false;
}

// Reduces a cyclic word (wrap-around adjacency included).  Ranks of merged
// pairs collapse onto the smaller rank.
inline void cyclic_reduce(Family fam, std::vector<RankedDecor>& w, DeltaPoly& coeff,
                          size_t& steps, size_t cap) {
  bool changed = true;
  while (changed && w.size() >= 2) {
    changed = false;
    size_t m = w.size();
    for (size_t i = 0; i < m; ++i) {
      size_t j = (i + 1) % m;
      if (m == 2 && j < i) break;  // avoid applying the same pair twice
      std::vector<Decor> repl;
      long long scalar;
      if (!pair_rule(fam, w[i].d, w[j].d, repl, scalar)) continue;
      if (++steps > cap) throw NonTerminatingError("loop rewrite exceeded step cap");
      long long r = std::min(w[i].rank, w[j].rank);
      std::vector<RankedDecor> nw;
      for (size_t t = 0; t < m; ++t)
        if (t != i && t != j) nw.push_back(w[t]);
      for (Decor d : repl) nw.push_back({d, r});
      coeff.mul_scalar(scalar);
      w = std::move(nw);
      changed = true;
      break;
    }
  }
}

enum class LoopKind { Empty, TriOnly, LDot, LCirc, LDotTri, LDotCirc, Other };

inline LoopKind loop_kind(Family fam, const std::vector<RankedDecor>& w) {
  if (w.empty()) return LoopKind::Empty;
  auto count = [&](Decor d) {
    size_t c = 0;
    for (const auto& x : w)
      if (x.d == d) ++c;
    return c;
  };
  if (fam == Family::AffineB) {
    if (w.size() == 1 && w[0].d == Decor::Tri) return LoopKind::TriOnly;
    if (w.size() == 1 && w[0].d == Decor::Dot) return LoopKind::LDot;
    if (w.size() == 2 && count(Decor::Dot) == 1 && count(Decor::Tri) == 1)
      return LoopKind::LDotTri;
    return LoopKind::Other;
  }
  if (w.size() == 1 && w[0].d == Decor::Dot) return LoopKind::LDot;
  if (w.size() == 1 && w[0].d == Decor::Circ) return LoopKind::LCirc;
  if (w.size() == 2 && count(Decor::Dot) == 1 && count(Decor::Circ) == 1)
    return LoopKind::LDotCirc;
  return LoopKind::Other;
}

struct WorkState {
  Family fam;
  int n;
  std::vector<RawEdge> edges;
  std::vector<RawLoop> loops;   // alive loops
  DeltaPoly coeff = DeltaPoly(1);
  size_t steps = 0;
  size_t cap = 0;

  void bump() {
    if (++steps > cap) throw NonTerminatingError("diagram rewrite exceeded step cap");
  }
};

// Reduce every loop cyclically and extract scalar-valued loops.
inline void settle_loops(WorkState& st) {
  std::vector<RawLoop> kept;
  for (auto& l : st.loops) {
    cyclic_reduce(st.fam, l.word, st.coeff, st.steps, st.cap);
    LoopKind kind = loop_kind(st.fam, l.word);
    if (kind == LoopKind::Empty) {
      st.coeff.mul_delta();
      continue;
    }
    if (st.fam == Family::AffineB && kind == LoopKind::TriOnly) {
      st.coeff.mul_delta();
      continue;
    }
    if (kind == LoopKind::Other)
      throw InternalAssertionError("loop with unexpected reduced decoration word");
    kept.push_back(std::move(l));
  }
  st.loops = std::move(kept);
}

inline bool loop_is(const RawLoop& l, Family fam, LoopKind k) {
  return loop_kind(fam, l.word) == k;
}

// Free-mode reduction: a(D) != 1, relative heights immaterial.
inline void reduce_free(WorkState& st) {
  bool changed = true;
  while (changed) {
    changed = false;
    // block rules on every edge
    for (auto& e : st.edges) {
      for (size_t i = 0; i + 1 < e.seq.size(); ++i) {
        std::vector<Decor> repl;
        long long scalar;
        if (!pair_rule(st.fam, e.seq[i].d, e.seq[i + 1].d, repl, scalar)) continue;
        st.bump();
        long long r = std::min(e.seq[i].rank, e.seq[i + 1].rank);
        std::vector<RankedDecor> ns(e.seq.begin(), e.seq.begin() + i);
        for (Decor d : repl) ns.push_back({d, r});
        ns.insert(ns.end(), e.seq.begin() + i + 2, e.seq.end());
        e.seq = std::move(ns);
        st.coeff.mul_scalar(scalar);
        changed = true;
        break;
      }
      if (changed) break;
    }
    if (changed) continue;
    settle_loops(st);
    // cross-edge dot rules (and their circ mirrors for family D)
    auto find_loop = [&](LoopKind k) -> int {
      for (size_t i = 0; i < st.loops.size(); ++i)
        if (loop_is(st.loops[i], st.fam, k)) return (int)i;
      return -1;
    };
    auto count_loop = [&](LoopKind k) {
      int c = 0;
      for (auto& l : st.loops)
        if (loop_is(l, st.fam, k)) ++c;
      return c;
    };
    // two plain decorated loops of one color collapse to one, times delta
    for (LoopKind k : {LoopKind::LDot, LoopKind::LCirc}) {
      if (count_loop(k) >= 2) {
        for (size_t i = st.loops.size(); i-- > 0;) {
          if (loop_is(st.loops[i], st.fam, k)) {
            st.loops.erase(st.loops.begin() + i);
            break;
          }
        }
        st.coeff.mul_delta();
        st.bump();
        changed = true;
        break;
      }
    }
    if (changed) continue;
    // a two-decoration loop next to a matching one-decoration loop collapses
    // onto the one-decoration loop, times delta
    LoopKind big = st.fam == Family::AffineB ? LoopKind::LDotTri : LoopKind::LDotCirc;
    if (count_loop(big) >= 1 &&
        (find_loop(LoopKind::LDot) >= 0 || find_loop(LoopKind::LCirc) >= 0)) {
      st.loops.erase(st.loops.begin() + find_loop(big));
      st.coeff.mul_delta();
      st.bump();
      changed = true;
      continue;
    }
    // absorption: an edge decoration vanishes next to a loop of its color
    for (auto [dec, kind] : {std::pair{Decor::Dot, LoopKind::LDot},
                             std::pair{Decor::Circ, LoopKind::LCirc}}) {
      if (st.fam == Family::AffineB && dec == Decor::Circ) continue;
      if (find_loop(kind) < 0) continue;
      for (auto& e : st.edges) {
        for (size_t i = 0; i < e.seq.size(); ++i) {
          if (e.seq[i].d != dec) continue;
          e.seq.erase(e.seq.begin() + i);
          st.bump();
          changed = true;
          break;
        }
        if (changed) break;
      }
      if (changed) break;
    }
  }
  settle_loops(st);
}

// Height-mode reduction: a(D) == 1, rules act on rank-adjacent entries only.
inline void reduce_height(WorkState& st) {
  settle_loops(st);
  struct Entry {
    bool on_loop;
    int idx;
    int pos;
    Decor d;
    long long rank;
  };
  auto collect = [&]() {
    std::vector<Entry> out;
    for (size_t i = 0; i < st.edges.size(); ++i)
      for (size_t p = 0; p < st.edges[i].seq.size(); ++p)
        out.push_back({false, (int)i, (int)p, st.edges[i].seq[p].d, st.edges[i].seq[p].rank});
    for (size_t i = 0; i < st.loops.size(); ++i)
      for (size_t p = 0; p < st.loops[i].word.size(); ++p)
        out.push_back({true, (int)i, (int)p, st.loops[i].word[p].d, st.loops[i].word[p].rank});
    std::sort(out.begin(), out.end(),
              [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
    return out;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    auto entries = collect();
    for (size_t i = 0; i + 1 < entries.size() && !changed; ++i) {
      const Entry& x = entries[i];
      const Entry& y = entries[i + 1];
      // same-edge block rule, only for seq-adjacent decorations
      if (!x.on_loop && !y.on_loop && x.idx == y.idx && std::abs(x.pos - y.pos) == 1) {
        std::vector<Decor> repl;
        long long scalar;
        if (pair_rule(st.fam, x.d, y.d, repl, scalar)) {
          st.bump();
          auto& seq = st.edges[x.idx].seq;
          int lo = std::min(x.pos, y.pos);
          long long r = std::min(x.rank, y.rank);
          seq.erase(seq.begin() + lo, seq.begin() + lo + 2);
          for (Decor d : repl) seq.insert(seq.begin() + lo, {d, r});
          st.coeff.mul_scalar(scalar);
          changed = true;
        }
        continue;
      }
      // cross rules act on two like-colored decorations; family B only moves
      // dots, family D also mirrors circs
      if (x.d != y.d) continue;
      if (x.d == Decor::Tri) continue;
      if (st.fam == Family::AffineB && x.d != Decor::Dot) continue;
      LoopKind plain = x.d == Decor::Dot ? LoopKind::LDot : LoopKind::LCirc;
      bool x_plain = x.on_loop && loop_is(st.loops[x.idx], st.fam, plain);
      bool y_plain = y.on_loop && loop_is(st.loops[y.idx], st.fam, plain);
      if (x_plain && y_plain && x.idx != y.idx) {
        // two adjacent decorated loops collapse to one, times delta
        st.bump();
        st.loops.erase(st.loops.begin() + std::max(x.idx, y.idx));
        st.coeff.mul_delta();
        changed = true;
        continue;
      }
      if (x_plain != y_plain) {
        // absorption: the edge decoration vanishes next to the loop
        const Entry& victim = x_plain ? y : x;
        if (victim.on_loop)
          throw InternalAssertionError("unexpected multi-decoration loop at a(D)=1");
        auto& seq = st.edges[victim.idx].seq;
        seq.erase(seq.begin() + victim.pos);
        st.bump();
        changed = true;
        continue;
      }
    }
    if (changed) {
      settle_loops(st);
    }
  }
}

}  // namespace detail

// Applies the defining relations to a concrete diagram until no relation
// applies; deterministic scan order, bounded by TLDIAG_STEP_CAP.
inline Reduction reduce(const RawDiagram& raw);

namespace detail {

inline Diagram finalize(WorkState& st, int a_north) {
  Diagram d;
  d.family = st.fam;
  d.n = st.n;
  int k = st.n + 2;
  std::sort(st.edges.begin(), st.edges.end(),
            [](const RawEdge& e, const RawEdge& f) {
              return std::make_pair(e.a, e.b) < std::make_pair(f.a, f.b);
            });
  for (auto& e : st.edges) {
    DiagEdge de;
    de.a = e.a;
    de.b = e.b;
    for (auto& rd : e.seq) de.seq.push_back(rd.d);
    d.edges.push_back(std::move(de));
  }
  if (a_north == 1) {
    // order loops by the rank of their first decoration
    std::sort(st.loops.begin(), st.loops.end(), [](const RawLoop& x, const RawLoop& y) {
      long long rx = x.word.empty() ? 0 : x.word.front().rank;
      long long ry = y.word.empty() ? 0 : y.word.front().rank;
      return rx < ry;
    });
  } else {
    std::sort(st.loops.begin(), st.loops.end(), [&](const RawLoop& x, const RawLoop& y) {
      std::vector<Decor> wx, wy;
      for (auto& rd : x.word) wx.push_back(rd.d);
      for (auto& rd : y.word) wy.push_back(rd.d);
      return canonical_cycle(wx) < canonical_cycle(wy);
    });
  }
  struct Ev {
    long long rank;
    MidEvent e;
  };
  std::vector<Ev> evs;
  for (size_t i = 0; i < st.loops.size(); ++i) {
    std::vector<Decor> w;
    for (auto& rd : st.loops[i].word) w.push_back(rd.d);
    // canonicalize the cyclic word; record events against the canonical word
    std::vector<Decor> cw = canonical_cycle(w);
    DiagLoop dl;
    dl.word = cw;
    d.loops.push_back(dl);
    if (a_north == 1)
      for (size_t p = 0; p < st.loops[i].word.size(); ++p)
        evs.push_back({st.loops[i].word[p].rank, MidEvent{true, (int)i, (int)p}});
  }
  if (a_north == 1) {
    for (size_t i = 0; i < st.edges.size(); ++i) {
      if (!Diagram::edge_is_prop(d.edges[i], k)) continue;
      for (size_t p = 0; p < st.edges[i].seq.size(); ++p)
        evs.push_back({st.edges[i].seq[p].rank, MidEvent{false, (int)i, (int)p}});
    }
    std::sort(evs.begin(), evs.end(), [](const Ev& x, const Ev& y) { return x.rank < y.rank; });
    for (auto& ev : evs) d.mid.push_back(ev.e);
  }
  return d;
}

inline void validate(const Diagram& d) {
  int k = d.k();
  std::vector<int> deg(2 * k, 0);
  for (const auto& e : d.edges) {
    if (e.a < 0 || e.b >= 2 * k || e.a >= e.b)
      throw InvalidInputError("bad edge endpoints");
    deg[e.a]++;
    deg[e.b]++;
  }
  for (int v = 0; v < 2 * k; ++v)
    if (deg[v] != 1) throw InvalidInputError("matching must cover every node once");
  if (!planar(d)) throw InvalidInputError("diagram is not planar");
  int a = d.a_count();
  if (a == 0) {
    for (const auto& e : d.edges)
      if (!e.seq.empty()) throw InvalidInputError("a(D)=0 diagrams must be undecorated");
    if (!d.loops.empty()) throw InvalidInputError("a(D)=0 diagrams cannot carry loops");
  }
  for (const auto& e : d.edges) {
    for (Decor dec : e.seq) {
      if (dec == Decor::Tri && d.family == Family::AffineD)
        throw InvalidInputError("triangle decoration is not allowed in family D");
      if (is_left_decor(dec) && !left_exposed(d, e))
        throw InvalidInputError("L-decoration on an edge that is not left-exposed");
      if (is_right_decor(dec) && !right_exposed(d, e))
        throw InvalidInputError("R-decoration on an edge that is not right-exposed");
    }
  }
  bool undammed = d.is_undammed();
  for (const auto& l : d.loops)
    if (l.word.size() >= 2 && !undammed)
      throw InvalidInputError("two-decoration loops require an undammed diagram");
}

}  // namespace detail

inline Reduction reduce(const RawDiagram& raw) {
  detail::WorkState st;
  st.fam = raw.family;
  st.n = raw.n;
  st.edges = raw.edges;
  st.loops = raw.loops;
  st.cap = rewrite_step_cap();
  int k = raw.k();
  int a_north = 0;
  for (auto& e : st.edges) {
    if (e.a > e.b) throw InvalidInputError("raw edge endpoints must satisfy a < b");
    if (e.b < k) ++a_north;
  }
  if (a_north == 1)
    detail::reduce_height(st);
  else
    detail::reduce_free(st);
  Reduction out;
  out.diagram = detail::finalize(st, a_north);
  out.coeff = st.coeff;
  detail::validate(out.diagram);
  return out;
}

// --- concatenation ------------------------------------------------------------

namespace detail {

struct Piece {
  // endpoint spaces: 0 = product north, 1 = glue, 2 = product south
  int space[2];
  int index[2];
  std::vector<RankedDecor> seq;  // read from endpoint 0 to endpoint 1
};

// Assigns global ranks to the decorations of one factor, bands ordered:
// north-face blocks, middle (mid order when a(D)==1), south-face blocks.
inline void ranked_pieces(const Diagram& d, bool is_top, long long& rank,
                          std::vector<Piece>& pieces, std::vector<RawLoop>& loops) {
  int k = d.k();
  std::vector<std::vector<long long>> edge_ranks(d.edges.size());
  std::vector<std::vector<long long>> loop_ranks(d.loops.size());
  for (size_t i = 0; i < d.edges.size(); ++i)
    edge_ranks[i].assign(d.edges[i].seq.size(), 0);
  for (size_t i = 0; i < d.loops.size(); ++i)
    loop_ranks[i].assign(d.loops[i].word.size(), 0);
  // north blocks
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (Diagram::edge_is_north(d.edges[i], k))
      for (size_t p = 0; p < d.edges[i].seq.size(); ++p) edge_ranks[i][p] = rank++;
  // middle
  if (d.a_count() == 1) {
    for (const auto& ev : d.mid) {
      if (ev.on_loop)
        loop_ranks[ev.idx][ev.pos] = rank++;
      else
        edge_ranks[ev.idx][ev.pos] = rank++;
    }
  } else {
    for (size_t i = 0; i < d.edges.size(); ++i)
      if (Diagram::edge_is_prop(d.edges[i], k))
        for (size_t p = 0; p < d.edges[i].seq.size(); ++p) edge_ranks[i][p] = rank++;
    for (size_t i = 0; i < d.loops.size(); ++i)
      for (size_t p = 0; p < d.loops[i].word.size(); ++p) loop_ranks[i][p] = rank++;
  }
  // south blocks
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (Diagram::edge_is_south(d.edges[i], k))
      for (size_t p = 0; p < d.edges[i].seq.size(); ++p) edge_ranks[i][p] = rank++;

  for (size_t i = 0; i < d.edges.size(); ++i) {
    const auto& e = d.edges[i];
    Piece pc;
    auto map_node = [&](int v, int slot) {
      if (is_top) {
        if (v < k) {
          pc.space[slot] = 0;
          pc.index[slot] = v;
        } else {
          pc.space[slot] = 1;
          pc.index[slot] = v - k;
        }
      } else {
        if (v < k) {
          pc.space[slot] = 1;
          pc.index[slot] = v;
        } else {
          pc.space[slot] = 2;
          pc.index[slot] = v - k;
        }
      }
    };
    map_node(e.a, 0);
    map_node(e.b, 1);
    for (size_t p = 0; p < e.seq.size(); ++p) pc.seq.push_back({e.seq[p], edge_ranks[i][p]});
    pieces.push_back(std::move(pc));
  }
  for (size_t i = 0; i < d.loops.size(); ++i) {
    RawLoop l;
    for (size_t p = 0; p < d.loops[i].word.size(); ++p)
      l.word.push_back({d.loops[i].word[p], loop_ranks[i][p]});
    loops.push_back(std::move(l));
  }
}

}  // namespace detail

// Concatenates x over y (north face of x, south face of y) without applying
// any relation; middle cycles become loops with inherited cyclic words.
inline RawDiagram concat_raw(const Diagram& x, const Diagram& y) {
  if (x.n != y.n || x.family != y.family)
    throw InvalidInputError("concat_raw: diagrams live in different boxes");
  int k = x.k();
  RawDiagram raw;
  raw.family = x.family;
  raw.n = x.n;
  std::vector<detail::Piece> pieces;
  long long rank = 0;
  detail::ranked_pieces(x, true, rank, pieces, raw.loops);
  detail::ranked_pieces(y, false, rank, pieces, raw.loops);

  // incidence: north i / south i have one piece end, glue i has two
  std::vector<std::pair<int, int>> at_north(k, {-1, -1}), at_south(k, {-1, -1});
  std::vector<std::vector<std::pair<int, int>>> at_glue(k);
  for (size_t pi = 0; pi < pieces.size(); ++pi)
    for (int s = 0; s < 2; ++s) {
      auto& pc = pieces[pi];
      if (pc.space[s] == 0)
        at_north[pc.index[s]] = {(int)pi, s};
      else if (pc.space[s] == 2)
        at_south[pc.index[s]] = {(int)pi, s};
      else
        at_glue[pc.index[s]].push_back({(int)pi, s});
    }
  for (int g = 0; g < k; ++g)
    if (at_glue[g].size() != 2)
      throw InternalAssertionError("glue node not matched by exactly two pieces");

  std::vector<bool> used(pieces.size(), false);
  auto walk = [&](int start_piece, int start_slot, int& end_space, int& end_index,
                  std::vector<RankedDecor>& seq) {
    int pi = start_piece, slot = start_slot;
    for (;;) {
      used[pi] = true;
      auto& pc = pieces[pi];
      int other = 1 - slot;
      if (slot == 0) {
        seq.insert(seq.end(), pc.seq.begin(), pc.seq.end());
      } else {
        for (auto it = pc.seq.rbegin(); it != pc.seq.rend(); ++it) seq.push_back(*it);
      }
      if (pc.space[other] != 1) {
        end_space = pc.space[other];
        end_index = pc.index[other];
        return;
      }
      int g = pc.index[other];
      auto [p0, s0] = at_glue[g][0];
      auto [p1, s1] = at_glue[g][1];
      if (p0 == pi && s0 == other) {
        pi = p1;
        slot = s1;
      } else {
        pi = p0;
        slot = s0;
      }
    }
  };

  auto add_edge = [&](int sp0, int i0, int sp1, int i1, std::vector<RankedDecor> seq) {
    int u = sp0 == 0 ? i0 : i0 + k;
    int v = sp1 == 0 ? i1 : i1 + k;
    if (u > v) {
      std::swap(u, v);
      std::reverse(seq.begin(), seq.end());
    }
    raw.edges.push_back({u, v, std::move(seq)});
  };

  for (int i = 0; i < k; ++i) {
    auto [pi, slot] = at_north[i];
    if (pi < 0 || used[pi]) continue;
    std::vector<RankedDecor> seq;
    int es, ei;
    walk(pi, slot, es, ei, seq);
    add_edge(0, i, es, ei, std::move(seq));
  }
  for (int i = 0; i < k; ++i) {
    auto [pi, slot] = at_south[i];
    if (pi < 0 || used[pi]) continue;
    std::vector<RankedDecor> seq;
    int es, ei;
    walk(pi, slot, es, ei, seq);
    add_edge(2, i, es, ei, std::move(seq));
  }
  // remaining pieces close into loops
  for (size_t pi = 0; pi < pieces.size(); ++pi) {
    if (used[pi]) continue;
    RawLoop loop;
    int cur = (int)pi, slot = 0;
    for (;;) {
      used[cur] = true;
      auto& pc = pieces[cur];
      int other = 1 - slot;
      if (slot == 0)
        loop.word.insert(loop.word.end(), pc.seq.begin(), pc.seq.end());
      else
        for (auto it = pc.seq.rbegin(); it != pc.seq.rend(); ++it) loop.word.push_back(*it);
      int g = pc.index[other];
      auto [p0, s0] = at_glue[g][0];
      auto [p1, s1] = at_glue[g][1];
      int np, ns;
      if (p0 == cur && s0 == other) {
        np = p1;
        ns = s1;
      } else {
        np = p0;
        ns = s0;
      }
      if (np == (int)pi && ns == 0) break;
      cur = np;
      slot = ns;
    }
    raw.loops.push_back(std::move(loop));
  }
  return raw;
}

// Product of two diagrams in the quotient algebra: concatenate then reduce.
inline Reduction diagram_product(const Diagram& x, const Diagram& y) {
  if (x.is_identity()) return Reduction{y, DeltaPoly(1)};
  if (y.is_identity()) return Reduction{x, DeltaPoly(1)};
  return reduce(concat_raw(x, y));
}

// Wraps a plain decorated diagram (no explicit heights: north-to-south block
// order) as a RawDiagram and reduces it.  For a(D)=1 inputs the mid order
// can be supplied explicitly.
inline Reduction reduce_concrete(Family family, int n, std::vector<DiagEdge> edges,
                                 std::vector<DiagLoop> loops,
                                 const std::vector<MidEvent>& mid = {}) {
  RawDiagram raw;
  raw.family = family;
  raw.n = n;
  int k = n + 2;
  long long rank = 0;
  std::vector<std::vector<long long>> er(edges.size());
  std::vector<std::vector<long long>> lr(loops.size());
  for (size_t i = 0; i < edges.size(); ++i) er[i].assign(edges[i].seq.size(), -1);
  for (size_t i = 0; i < loops.size(); ++i) lr[i].assign(loops[i].word.size(), -1);
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].b < k)
      for (size_t p = 0; p < edges[i].seq.size(); ++p) er[i][p] = rank++;
  if (!mid.empty()) {
    for (const auto& ev : mid) {
      if (ev.on_loop)
        lr.at(ev.idx).at(ev.pos) = rank++;
      else
        er.at(ev.idx).at(ev.pos) = rank++;
    }
  }
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].a < k && edges[i].b >= k)
      for (size_t p = 0; p < edges[i].seq.size(); ++p)
        if (er[i][p] < 0) er[i][p] = rank++;
  for (size_t i = 0; i < loops.size(); ++i)
    for (size_t p = 0; p < loops[i].word.size(); ++p)
      if (lr[i][p] < 0) lr[i][p] = rank++;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].a >= k)
      for (size_t p = 0; p < edges[i].seq.size(); ++p)
        if (er[i][p] < 0) er[i][p] = rank++;
  for (size_t i = 0; i < edges.size(); ++i) {
    RawEdge e{edges[i].a, edges[i].b, {}};
    for (size_t p = 0; p < edges[i].seq.size(); ++p)
      e.seq.push_back({edges[i].seq[p], er[i][p]});
    raw.edges.push_back(std::move(e));
  }
  for (size_t i = 0; i < loops.size(); ++i) {
    RawLoop l;
    for (size_t p = 0; p < loops[i].word.size(); ++p)
      l.word.push_back({loops[i].word[p], lr[i][p]});
    raw.loops.push_back(std::move(l));
  }
  return reduce(raw);
}

}  // namespace tldiag
