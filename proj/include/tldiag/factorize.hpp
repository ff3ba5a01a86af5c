#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tldiag/admissible.hpp"
#include "tldiag/algebra.hpp"
#include "tldiag/diagram.hpp"

namespace tldiag {

struct NotALTError : Error {
  explicit NotALTError(const std::string& m) : Error(m) {}
};
struct IdentityDiagramError : Error {
  explicit IdentityDiagramError(const std::string& m) : Error(m) {}
};
struct NotSuitableError : Error {
  explicit NotSuitableError(const std::string& m) : Error(m) {}
};
struct PreconditionNotMetError : Error {
  explicit PreconditionNotMetError(const std::string& m) : Error(m) {}
};
struct WrongClassError : Error {
  explicit WrongClassError(const std::string& m) : Error(m) {}
};

enum class EdgeForm : uint8_t { Plain, DotForm, CircForm };
enum class EdgeType : uint8_t {
  UL, UR, N, PL, PR, SL, SR, PRDot,
  BasicBigLoop, BasicDotLoop, BasicCircLoop, BasicPlain, BasicSouth
};

inline const char* edge_type_name(EdgeType t) {
  switch (t) {
    case EdgeType::UL: return "U_L";
    case EdgeType::UR: return "U_R";
    case EdgeType::N: return "N";
    case EdgeType::PL: return "P_L";
    case EdgeType::PR: return "P_R";
    case EdgeType::SL: return "S_L";
    case EdgeType::SR: return "S_R";
    case EdgeType::PRDot: return "P_R.";
    case EdgeType::BasicBigLoop: return "basic-a";
    case EdgeType::BasicDotLoop: return "basic-b";
    case EdgeType::BasicCircLoop: return "basic-b'";
    case EdgeType::BasicPlain: return "basic-c";
    case EdgeType::BasicSouth: return "basic-d";
  }
  return "?";
}

struct SuitableEdge {
  int edge_idx = -1;   // the simple edge {i, i+1}
  int col = 0;         // 1-based left column i
  EdgeForm form = EdgeForm::Plain;
  EdgeType type = EdgeType::BasicPlain;
  bool neighbor_is_loop = false;
  int neighbor_idx = -1;
  bool flagged = false;  // multiple qualifying neighbors, leftmost taken
};

namespace detail {

// simple_diagram without the n >= 2 spec guard, used for inner-window boxes
inline Diagram simple_diagram_any(Family fam, int n, int gen) {
  const int k = n + 2;
  int col;
  std::vector<Decor> decor;
  int last = fam == Family::AffineB ? n + 1 : n + 2;
  if (gen == 0) {
    col = 1;
    decor = {Decor::Dot};
  } else if (gen == last) {
    col = n + 1;
    decor = {Decor::Circ};
  } else {
    col = gen;
  }
  Diagram d;
  d.family = fam;
  d.n = n;
  d.edges.push_back({col - 1, col, decor});
  d.edges.push_back({k + col - 1, k + col, decor});
  for (int c = 1; c <= k; ++c)
    if (c != col && c != col + 1) d.edges.push_back({c - 1, c - 1 + k, {}});
  std::sort(d.edges.begin(), d.edges.end(), [](const DiagEdge& e, const DiagEdge& f) {
    return std::make_pair(e.a, e.b) < std::make_pair(f.a, f.b);
  });
  return d;
}

inline int generator_for(Family fam, int n, int col, EdgeForm form) {
  if (form == EdgeForm::DotForm) return 0;
  if (form == EdgeForm::CircForm) return fam == Family::AffineB ? n + 1 : n + 2;
  return col;
}

inline std::optional<EdgeForm> simple_form(const Diagram& d, const DiagEdge& e) {
  if (!Diagram::edge_is_north(e, d.k()) || e.b != e.a + 1) return std::nullopt;
  int col = d.node_col(e.a);
  if (e.seq.empty()) return EdgeForm::Plain;
  if (e.seq == std::vector<Decor>{Decor::Dot} && col == 1) return EdgeForm::DotForm;
  if (e.seq == std::vector<Decor>{Decor::Circ} && col == d.n + 1) return EdgeForm::CircForm;
  return std::nullopt;
}

inline bool is_basic(const Diagram& d) {
  for (const auto& e : d.edges) {
    if (Diagram::edge_is_north(e, d.k()) && !simple_form(d, e)) return false;
    if (Diagram::edge_is_prop(e, d.k()) && (e.b != e.a + d.k() || !e.seq.empty()))
      return false;
  }
  return true;
}

inline bool has_decor(const DiagEdge& e, Decor dec) {
  return std::find(e.seq.begin(), e.seq.end(), dec) != e.seq.end();
}

// the R-decoration that plays triangle's role on the left-looking conditions
inline Decor r_marker(Family fam) {
  return fam == Family::AffineB ? Decor::Tri : Decor::Circ;
}

// ranked snapshot of a diagram's decorations: north block, then the mid
// order, then south block
struct Snapshot {
  std::vector<RawEdge> edges;
  std::vector<RawLoop> loops;
};

inline Snapshot ranked_snapshot(const Diagram& d) {
  Snapshot s;
  const int k = d.k();
  long long rank = 0;
  auto next = [&rank]() { long long r = rank; rank += 16; return r; };
  std::vector<std::vector<long long>> er(d.edges.size()), lr(d.loops.size());
  for (size_t i = 0; i < d.edges.size(); ++i) er[i].assign(d.edges[i].seq.size(), -1);
  for (size_t i = 0; i < d.loops.size(); ++i) lr[i].assign(d.loops[i].word.size(), -1);
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (Diagram::edge_is_north(d.edges[i], k))
      for (size_t p = 0; p < d.edges[i].seq.size(); ++p) er[i][p] = next();
  if (d.a_count() == 1) {
    for (const auto& ev : d.mid)
      if (ev.on_loop)
        lr[ev.idx][ev.pos] = next();
      else
        er[ev.idx][ev.pos] = next();
  } else {
    for (size_t i = 0; i < d.edges.size(); ++i)
      if (Diagram::edge_is_prop(d.edges[i], k))
        for (size_t p = 0; p < d.edges[i].seq.size(); ++p) er[i][p] = next();
    for (size_t i = 0; i < d.loops.size(); ++i)
      for (size_t p = 0; p < d.loops[i].word.size(); ++p) lr[i][p] = next();
  }
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (Diagram::edge_is_south(d.edges[i], k))
      for (size_t p = 0; p < d.edges[i].seq.size(); ++p) er[i][p] = next();
  for (size_t i = 0; i < d.edges.size(); ++i) {
    RawEdge e{d.edges[i].a, d.edges[i].b, {}};
    for (size_t p = 0; p < d.edges[i].seq.size(); ++p)
      e.seq.push_back({d.edges[i].seq[p], er[i][p]});
    s.edges.push_back(std::move(e));
  }
  for (size_t i = 0; i < d.loops.size(); ++i) {
    RawLoop l;
    for (size_t p = 0; p < d.loops[i].word.size(); ++p)
      l.word.push_back({d.loops[i].word[p], lr[i][p]});
    s.loops.push_back(std::move(l));
  }
  return s;
}

}  // namespace detail

// All suitable edges of an ALT-diagram, leftmost first (neighbor ambiguity
// resolved innermost-first and flagged).
inline std::vector<SuitableEdge> suitable_edges(const Diagram& d) {
  if (d.is_identity()) throw IdentityDiagramError("the identity diagram has no suitable edge");
  if (classify_diagram(d).tag != HeapFamilyTag::ALT)
    throw NotALTError("suitable_edge expects an ALT-diagram");
  const int k = d.k();
  struct Simple {
    int idx;
    int col;
    EdgeForm form;
  };
  std::vector<Simple> simples;
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (auto f = detail::simple_form(d, d.edges[i]))
      simples.push_back({(int)i, d.node_col(d.edges[i].a), *f});
  std::sort(simples.begin(), simples.end(),
            [](const Simple& a, const Simple& b) { return a.col < b.col; });
  if (simples.empty())
    throw InternalAssertionError("ALT-diagram without a simple edge");

  if (detail::is_basic(d)) {
    // (a) two-decoration loops take precedence
    for (size_t li = 0; li < d.loops.size(); ++li)
      if (d.loops[li].word.size() == 2) {
        std::vector<SuitableEdge> out;
        for (const auto& sp : simples)
          out.push_back({sp.idx, sp.col, sp.form, EdgeType::BasicBigLoop, true, (int)li});
        return out;
      }
    // (b) a plain decorated loop pins the wall-adjacent simple edge
    std::vector<SuitableEdge> loop_pinned;
    for (size_t li = 0; li < d.loops.size(); ++li) {
      if (d.loops[li].word == std::vector<Decor>{Decor::Dot}) {
        for (const auto& sp : simples)
          if (sp.col == 1)
            loop_pinned.push_back(
                {sp.idx, sp.col, sp.form, EdgeType::BasicDotLoop, true, (int)li});
      }
      if (d.family == Family::AffineD &&
          d.loops[li].word == std::vector<Decor>{Decor::Circ}) {
        for (const auto& sp : simples)
          if (sp.col == d.n + 1)
            loop_pinned.push_back(
                {sp.idx, sp.col, sp.form, EdgeType::BasicCircLoop, true, (int)li});
      }
    }
    if (!d.loops.empty()) {
      if (loop_pinned.empty())
        throw InternalAssertionError("decorated loop without its wall simple edge");
      return loop_pinned;
    }
    // south-face neighbors
    bool south_decorated = false;
    for (const auto& e : d.edges)
      if (Diagram::edge_is_south(e, k) && !e.seq.empty()) south_decorated = true;
    // qualifying south edges for clause (d)
    auto south_cols = [&](const DiagEdge& e) {
      return std::make_pair(d.node_col(e.a), d.node_col(e.b));
    };
    int rightmost_dotted = -1, leftmost_rdec = -1;
    for (size_t ei = 0; ei < d.edges.size(); ++ei) {
      const auto& e = d.edges[ei];
      if (!Diagram::edge_is_south(e, k)) continue;
      bool dot = detail::has_decor(e, Decor::Dot);
      bool rdec = detail::has_decor(e, Decor::Circ) || detail::has_decor(e, Decor::Tri);
      if (dot) {
        if (rightmost_dotted < 0 ||
            south_cols(e).first > south_cols(d.edges[rightmost_dotted]).first)
          rightmost_dotted = (int)ei;
      }
      if (rdec) {
        if (leftmost_rdec < 0 ||
            south_cols(e).first < south_cols(d.edges[leftmost_rdec]).first)
          leftmost_rdec = (int)ei;
      }
    }
    std::vector<SuitableEdge> out;
    for (const auto& sp : simples) {
      int i = sp.col;
      // south edges crossed by the line i + 1/2, innermost first
      std::vector<int> crossed;
      for (size_t ei = 0; ei < d.edges.size(); ++ei) {
        const auto& e = d.edges[ei];
        if (!Diagram::edge_is_south(e, k)) continue;
        auto [lo, hi] = south_cols(e);
        if (lo <= i && i < hi) crossed.push_back((int)ei);
      }
      std::sort(crossed.begin(), crossed.end(), [&](int x, int y) {
        return south_cols(d.edges[x]).first > south_cols(d.edges[y]).first;
      });
      if (!south_decorated) {
        if (crossed.empty()) continue;
        out.push_back({sp.idx, sp.col, sp.form, EdgeType::BasicPlain, false, crossed.front()});
        continue;
      }
      std::vector<int> qualifying;
      for (int ei : crossed) {
        const auto& e = d.edges[ei];
        bool dot = detail::has_decor(e, Decor::Dot);
        bool rdec = detail::has_decor(e, Decor::Circ) || detail::has_decor(e, Decor::Tri);
        if ((dot && rdec) || ei == rightmost_dotted || ei == leftmost_rdec)
          qualifying.push_back(ei);
      }
      if (qualifying.empty()) continue;
      SuitableEdge se{sp.idx, sp.col, sp.form, EdgeType::BasicSouth, false, qualifying.front()};
      se.flagged = qualifying.size() > 1;
      out.push_back(se);
    }
    if (out.empty()) throw InternalAssertionError("basic ALT-diagram without a suitable edge");
    return out;
  }

  // non-basic: look for simple edges of type U, N, P, S or P_R-dot
  const Decor rmark = detail::r_marker(d.family);
  std::vector<SuitableEdge> out;
  for (const auto& s : simples) {
    const int i = s.col;
    auto col_of = [&](int node) { return d.node_col(node); };
    std::optional<SuitableEdge> found;
    auto set = [&](EdgeType t, bool on_loop, int nb) {
      if (!found) found = SuitableEdge{s.idx, s.col, s.form, t, on_loop, nb};
    };
    for (size_t ei = 0; ei < d.edges.size() && !found; ++ei) {
      const auto& f = d.edges[ei];
      if ((int)ei == s.idx) continue;
      bool north = Diagram::edge_is_north(f, k);
      bool prop = Diagram::edge_is_prop(f, k);
      // U_R: north edge leaving i+2 rightwards with a dot
      if (north && col_of(f.a) == i + 2 && detail::has_decor(f, Decor::Dot))
        set(EdgeType::UR, false, (int)ei);
      // U_L: north edge arriving at i-1 from the left with the R-marker
      else if (north && col_of(f.b) == i - 1 && detail::has_decor(f, rmark))
        set(EdgeType::UL, false, (int)ei);
      // P_R / P_L: propagating neighbors
      else if (prop && col_of(f.a) == i + 2 && col_of(f.b) <= i && f.b != f.a + k)
        set(EdgeType::PR, false, (int)ei);
      else if (prop && col_of(f.a) == i - 1 && col_of(f.b) >= i + 1 && f.b != f.a + k)
        set(EdgeType::PL, false, (int)ei);
      // S_R / S_L: decorated verticals
      else if (prop && f.b == f.a + k && col_of(f.a) == i + 2 &&
               detail::has_decor(f, Decor::Dot))
        set(EdgeType::SR, false, (int)ei);
      else if (prop && f.b == f.a + k && col_of(f.a) == i - 1 &&
               detail::has_decor(f, rmark))
        set(EdgeType::SL, false, (int)ei);
    }
    if (!found) {
      // N: innermost north edge nested over e
      int best = -1;
      for (size_t ei = 0; ei < d.edges.size(); ++ei) {
        const auto& f = d.edges[ei];
        if (!Diagram::edge_is_north(f, k)) continue;
        if (col_of(f.a) < i && col_of(f.b) > i + 1) {
          if (best < 0 || col_of(f.a) > col_of(d.edges[best].a)) best = (int)ei;
        }
      }
      if (best >= 0) found = SuitableEdge{s.idx, s.col, s.form, EdgeType::N, false, best};
    }
    if (!found && s.form == EdgeForm::Plain && i == 1) {
      // P_R-dot: a dotted loop plus the undecorated edge {3,1'}
      int loop_idx = -1;
      for (size_t li = 0; li < d.loops.size(); ++li)
        if (d.loops[li].word == std::vector<Decor>{Decor::Dot}) loop_idx = (int)li;
      const DiagEdge* f = d.edge_at(2);  // north node of column 3
      if (loop_idx >= 0 && f && f->a == 2 && f->b == k && f->seq.empty())
        found = SuitableEdge{s.idx, s.col, s.form, EdgeType::PRDot, true, loop_idx};
    }
    if (found) out.push_back(*found);
  }
  if (out.empty())
    throw InternalAssertionError("non-basic ALT-diagram without a suitable edge");
  return out;
}

// The leftmost suitable edge.
inline SuitableEdge suitable_edge(const Diagram& d) { return suitable_edges(d).front(); }

namespace detail {

struct CpCandidate {
  std::vector<RawEdge> edges;
  std::vector<RawLoop> loops;
};

// Builds candidate diagrams for the cut and paste surgery: delete the simple
// edge, cut the neighbor, rejoin the free ends to the freed nodes, and
// distribute the decorations over the cut in all plausible ways.
inline std::vector<CpCandidate> cp_candidates(const Diagram& d, const SuitableEdge& se) {
  const int k = d.k();
  Snapshot snap = ranked_snapshot(d);
  const int node_i = d.edges[se.edge_idx].a;      // freed north nodes
  const int node_i1 = d.edges[se.edge_idx].b;
  std::vector<CpCandidate> out;

  // base: everything except e and the neighbor
  CpCandidate base;
  for (size_t ei = 0; ei < snap.edges.size(); ++ei) {
    if ((int)ei == se.edge_idx) continue;
    if (!se.neighbor_is_loop && (int)ei == se.neighbor_idx) continue;
    base.edges.push_back(snap.edges[ei]);
  }
  for (size_t li = 0; li < snap.loops.size(); ++li) {
    if (se.neighbor_is_loop && (int)li == se.neighbor_idx) continue;
    base.loops.push_back(snap.loops[li]);
  }

  auto add_edge = [&](CpCandidate& c, int u, int v, std::vector<RankedDecor> seq) {
    if (u > v) {
      std::swap(u, v);
      std::reverse(seq.begin(), seq.end());
    }
    c.edges.push_back({u, v, std::move(seq)});
  };

  // split variants of a decoration word: cut points, plus consuming one
  // matching decoration at the cut (for the dotted/circled edge forms), plus
  // splitting a triangle back into a circle (family B).
  auto splits = [&](const std::vector<RankedDecor>& seq) {
    std::vector<std::pair<std::vector<RankedDecor>, std::vector<RankedDecor>>> vs;
    for (size_t p = 0; p <= seq.size(); ++p)
      vs.push_back({{seq.begin(), seq.begin() + p}, {seq.begin() + p, seq.end()}});
    Decor consumed = se.form == EdgeForm::DotForm ? Decor::Dot : Decor::Circ;
    if (se.form != EdgeForm::Plain) {
      for (size_t p = 0; p < seq.size(); ++p) {
        if (seq[p].d == consumed)
          vs.push_back({{seq.begin(), seq.begin() + p}, {seq.begin() + p + 1, seq.end()}});
        if (d.family == Family::AffineB && se.form == EdgeForm::CircForm &&
            seq[p].d == Decor::Tri) {
          // one circle of the fused pair is consumed, the other stays
          std::vector<RankedDecor> left(seq.begin(), seq.begin() + p);
          std::vector<RankedDecor> right(seq.begin() + p + 1, seq.end());
          auto l2 = left;
          l2.push_back({Decor::Circ, seq[p].rank});
          vs.push_back({l2, right});
          auto r2 = right;
          r2.insert(r2.begin(), {Decor::Circ, seq[p].rank});
          vs.push_back({left, r2});
        }
      }
    }
    return vs;
  };

  if (se.neighbor_is_loop) {
    const RawLoop& loop = snap.loops[se.neighbor_idx];
    // cut the loop at every position and direction; the arc becomes the new
    // simple edge {i, i+1}
    std::vector<std::vector<RankedDecor>> words;
    std::vector<RankedDecor> w = loop.word;
    for (int dir = 0; dir < 2; ++dir) {
      for (size_t r = 0; r <= w.size(); ++r) {
        std::vector<RankedDecor> rot(w.begin() + std::min(r, w.size()), w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + std::min(r, w.size()));
        words.push_back(rot);
        if (w.empty()) break;
      }
      std::reverse(w.begin(), w.end());
    }
    for (auto& word : words) {
      CpCandidate c = base;
      add_edge(c, node_i, node_i1, word);
      out.push_back(std::move(c));
      if (se.form == EdgeForm::DotForm) {
        // the dotted form consumes one dot from the loop word
        for (size_t p = 0; p < word.size(); ++p) {
          if (word[p].d != Decor::Dot) continue;
          auto word2 = word;
          word2.erase(word2.begin() + p);
          CpCandidate c2 = base;
          add_edge(c2, node_i, node_i1, word2);
          out.push_back(std::move(c2));
        }
      }
    }
    return out;
  }

  const RawEdge& f = snap.edges[se.neighbor_idx];
  for (auto& [su, sv] : splits(f.seq)) {
    for (int pairing = 0; pairing < 2; ++pairing) {
      int to_u = pairing == 0 ? node_i : node_i1;
      int to_v = pairing == 0 ? node_i1 : node_i;
      CpCandidate c = base;
      // piece containing f.a keeps the prefix; reading stays from f.a outward
      add_edge(c, f.a, to_u, su);
      {
        auto tail = sv;
        std::reverse(tail.begin(), tail.end());  // read from the far end first
        add_edge(c, f.b, to_v, std::move(tail));
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

struct StepResult {
  int generator;
  Diagram next;
  std::string note;
};

inline std::optional<Diagram> try_candidate(const Diagram& d, int gen,
                                            const CpCandidate& cand) {
  RawDiagram raw;
  raw.family = d.family;
  raw.n = d.n;
  raw.edges = cand.edges;
  raw.loops = cand.loops;
  for (auto& e : raw.edges)
    if (e.a > e.b) return std::nullopt;
  Reduction r;
  try {
    r = reduce(raw);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!r.coeff.is_one()) return std::nullopt;
  if (!is_admissible(r.diagram).ok) return std::nullopt;
  Reduction prod = diagram_product(simple_diagram_any(d.family, d.n, gen), r.diagram);
  if (!prod.coeff.is_one() || prod.diagram != d) return std::nullopt;
  try {
    if (diagram_length(r.diagram) != diagram_length(d) - 1) return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
  return r.diagram;
}

}  // namespace detail

// The cut and paste operation: strips one simple diagram off an ALT-diagram
// along a suitable edge.  The decoration displacement is searched over the
// local split candidates and validated by the product identity; the valid
// result is unique.
inline std::pair<int, Diagram> cut_and_paste(const Diagram& d, const SuitableEdge& se) {
  if (se.edge_idx < 0 || se.edge_idx >= (int)d.edges.size())
    throw NotSuitableError("cut_and_paste: bad edge reference");
  if (!detail::simple_form(d, d.edges[se.edge_idx]))
    throw NotSuitableError("cut_and_paste: edge is not simple");
  int gen = detail::generator_for(d.family, d.n, se.col, se.form);
  std::vector<Diagram> valid;
  for (const auto& cand : detail::cp_candidates(d, se)) {
    if (auto res = detail::try_candidate(d, gen, cand)) {
      bool dup = false;
      for (const auto& v : valid)
        if (v == *res) dup = true;
      if (!dup) valid.push_back(*res);
    }
  }
  if (valid.empty())
    throw InternalAssertionError("cut_and_paste: no valid decoration displacement found");
  if (valid.size() > 1)
    throw InternalAssertionError("cut_and_paste: displacement is not unique");
  return {gen, valid.front()};
}

// The K_L / K_R operation on a P-diagram: deletes the cup at the peak margin,
// cuts the adjacent margin vertical and rejoins.  Throws PreconditionNotMet
// when the peak edge is not a plain simple cup (callers then recurse into the
// inner diagram).
inline std::pair<int, Diagram> k_operation(const Diagram& d) {
  AdmissibleClass cls = classify_diagram(d);
  bool lp_side = cls.tag == HeapFamilyTag::LP || cls.tag == HeapFamilyTag::LRP;
  bool rp_side = cls.tag == HeapFamilyTag::RP || cls.tag == HeapFamilyTag::LRP;
  if (!lp_side && !rp_side)
    throw PreconditionNotMetError("k_operation: not a P-diagram");
  const int k = d.k();
  auto try_side = [&](bool left) -> std::optional<std::pair<int, Diagram>> {
    int peak = left ? cls.j_left : cls.j_right;
    // the cup leaving the peak column and the margin vertical next to it
    int cup_a = left ? peak - 1 : peak - 2;          // 0-based node of the cup
    int vert_col = left ? peak - 1 : peak + 1;       // 1-based margin vertical
    const DiagEdge* cup = d.edge_at(cup_a);
    if (!cup || cup->a != cup_a || cup->b != cup_a + 1 || !cup->seq.empty())
      return std::nullopt;
    const DiagEdge* vert = d.edge_at(vert_col - 1);
    if (!vert || vert->b != vert->a + k) return std::nullopt;
    int gen = left ? peak : peak - 1;
    detail::Snapshot snap = detail::ranked_snapshot(d);
    int cup_idx = d.edge_index_at(cup_a);
    int vert_idx = d.edge_index_at(vert_col - 1);
    detail::CpCandidate base;
    for (size_t ei = 0; ei < snap.edges.size(); ++ei)
      if ((int)ei != cup_idx && (int)ei != vert_idx) base.edges.push_back(snap.edges[ei]);
    base.loops = snap.loops;
    // rejoin: north stub pairs with the freed cup node next to it, the south
    // stub with the other freed node
    int north_stub = vert_col - 1;
    int south_stub = vert_col - 1 + k;
    int near_node = left ? cup_a : cup_a + 1;
    int far_node = left ? cup_a + 1 : cup_a;
    const auto& vseq = snap.edges[vert_idx].seq;
    std::vector<Diagram> valid;
    auto try_split = [&](std::vector<RankedDecor> to_cup, std::vector<RankedDecor> to_prop) {
      detail::CpCandidate c = base;
      auto cup_seq = to_cup;
      int u = north_stub, v = near_node;
      if (u > v) std::reverse(cup_seq.begin(), cup_seq.end());
      c.edges.push_back({std::min(u, v), std::max(u, v), cup_seq});
      auto prop_seq = to_prop;
      c.edges.push_back({far_node, south_stub, prop_seq});
      if (auto res = detail::try_candidate(d, gen, c)) {
        bool dup = false;
        for (const auto& x : valid)
          if (x == *res) dup = true;
        if (!dup) valid.push_back(*res);
      }
    };
    for (size_t p = 0; p <= vseq.size(); ++p)
      try_split({vseq.begin(), vseq.begin() + p}, {vseq.begin() + p, vseq.end()});
    // family B: the triangle on the right-wall vertical unwinds into two
    // circles, one per new edge
    for (size_t p = 0; p < vseq.size(); ++p) {
      if (d.family != Family::AffineB || vseq[p].d != Decor::Tri) continue;
      std::vector<RankedDecor> pre(vseq.begin(), vseq.begin() + p);
      std::vector<RankedDecor> post(vseq.begin() + p + 1, vseq.end());
      auto c1 = pre;
      c1.push_back({Decor::Circ, vseq[p].rank});
      auto p1 = post;
      p1.insert(p1.begin(), {Decor::Circ, vseq[p].rank + 1});
      try_split(c1, p1);
    }
    if (valid.size() == 1) return std::make_pair(gen, valid.front());
    if (valid.size() > 1)
      throw InternalAssertionError("k_operation: displacement is not unique");
    return std::nullopt;
  };
  if (lp_side)
    if (auto r = try_side(true)) return *r;
  if (rp_side)
    if (auto r = try_side(false)) return *r;
  throw PreconditionNotMetError("k_operation: peak edges do not admit the K move");
}

// --- closed-form PZZ factorization ---------------------------------------------

namespace detail {

inline void push_range(Word& w, int from, int to) {
  if (from <= to)
    for (int g = from; g <= to; ++g) w.push_back(g);
  else
    for (int g = from; g >= to; --g) w.push_back(g);
}

// one right-end visit: s_{n+1} in family B, the commuting fork pair in D
inline void push_right(Word& w, Family fam, int n) {
  w.push_back(n + 1);
  if (fam == Family::AffineD) w.push_back(n + 2);
}
inline void push_left(Word& w) {
  w.push_back(0);
  w.push_back(1);
}

}  // namespace detail

// Closed-form factorization of PZZ-diagrams (and a(D)=1 P-diagrams, which are
// routed through the peak operations).  theta of the result reproduces D.
inline Word factor_pzz_closed_form(const Diagram& d);

// Full factorization: inverts theta on any admissible diagram.
struct FactorStep {
  std::string op;       // "cp", "K_L", "K_R", "inner-cp", "pzz"
  std::string edge;     // description of the edge / operation site
  std::string type;     // suitable edge type when applicable
  int generator = -1;
};

struct Factorization {
  Word word;
  std::vector<FactorStep> steps;
};

namespace detail {

inline Word pzz_word(const Diagram& d, const AdmissibleClass& cls) {
  const Family fam = d.family;
  const int n = d.n;
  const int i = cls.i, j = cls.j, l = cls.l, r = cls.r;
  Word w;
  auto left_then_climb = [&](int upto) {
    // descend i..2, visit the left fork, climb 2..upto
    detail::push_range(w, i, 2);
    detail::push_left(w);
    detail::push_range(w, 2, upto);
  };
  switch (cls.pzz_type) {
    case PzzType::RR:
      detail::push_range(w, i, n);
      for (int t = 0; t < l; ++t) {
        detail::push_right(w, fam, n);
        detail::push_range(w, n, 2);
        detail::push_left(w);
        detail::push_range(w, 2, n);
      }
      detail::push_right(w, fam, n);
      detail::push_range(w, n, j);
      break;
    case PzzType::DotDot:
      detail::push_range(w, i, 2);
      detail::push_left(w);
      for (int t = 0; t < r; ++t) {
        detail::push_range(w, 2, n);
        detail::push_right(w, fam, n);
        detail::push_range(w, n, 2);
        detail::push_left(w);
      }
      detail::push_range(w, 2, j);
      break;
    case PzzType::RDot:
      detail::push_range(w, i, n);
      for (int t = 0; t < r - 1; ++t) {
        detail::push_right(w, fam, n);
        detail::push_range(w, n, 2);
        detail::push_left(w);
        detail::push_range(w, 2, n);
      }
      detail::push_right(w, fam, n);
      detail::push_range(w, n, 2);
      detail::push_left(w);
      detail::push_range(w, 2, j);
      break;
    case PzzType::DotR:
      detail::push_range(w, i, 2);
      detail::push_left(w);
      for (int t = 0; t < l - 1; ++t) {
        detail::push_range(w, 2, n);
        detail::push_right(w, fam, n);
        detail::push_range(w, n, 2);
        detail::push_left(w);
      }
      detail::push_range(w, 2, n);
      detail::push_right(w, fam, n);
      detail::push_range(w, n, j);
      break;
  }
  return w;
}

inline Factorization factorize_impl(const Diagram& d0);

}  // namespace detail

inline Word factor_pzz_closed_form(const Diagram& d) {
  AdmissibleClass cls = classify_diagram(d);
  if (cls.tag == HeapFamilyTag::PZZ) {
    Word w = detail::pzz_word(d, cls);
    Diagram check = theta_diagram(w, CoxeterSpec(d.family, d.n));
    if (check != d)
      throw InternalAssertionError("PZZ closed form does not reproduce the diagram");
    if ((long long)w.size() != diagram_length(d))
      throw InternalAssertionError("PZZ closed form has the wrong length");
    return w;
  }
  if ((cls.tag == HeapFamilyTag::LP || cls.tag == HeapFamilyTag::RP ||
       cls.tag == HeapFamilyTag::LRP) &&
      d.a_count() == 1)
    return detail::factorize_impl(d).word;
  throw WrongClassError("factor_pzz_closed_form: diagram is neither PZZ nor an a(D)=1 P-diagram");
}

namespace detail {

// One factorization step on a P-diagram that falls back to the inner
// alternating diagram when the peak operations do not apply.
inline StepResult p_step_via_inner(const Diagram& d, const AdmissibleClass& cls) {
  Diagram inner = inner_diagram(d);
  int jl = cls.tag == HeapFamilyTag::RP ? 1 : cls.j_left;
  int jr = cls.tag == HeapFamilyTag::LP ? d.k() : cls.j_right;
  int khat = jr - jl + 1;
  std::vector<SuitableEdge> cands = suitable_edges(inner);
  // prefer edges away from the re-embedding boundaries
  std::stable_sort(cands.begin(), cands.end(), [&](const SuitableEdge& x, const SuitableEdge& y) {
    auto boundary = [&](const SuitableEdge& se) {
      bool left_cut = cls.tag != HeapFamilyTag::RP;   // window was cut on the left
      bool right_cut = jr < d.k();                    // window was cut on the right
      return (left_cut && se.col == 1) || (right_cut && se.col + 1 == khat);
    };
    return boundary(x) < boundary(y);
  });
  std::string last_err = "no suitable inner edge validated";
  for (const auto& se : cands) {
    std::pair<int, Diagram> step;
    try {
      step = cut_and_paste(inner, se);
    } catch (const Error& e) {
      last_err = e.what();
      continue;
    }
    const Diagram& inner_next = step.second;
    // translate the inner generator to the ambient box
    int gen;
    if (se.form == EdgeForm::DotForm) {
      if (jl != 1) { last_err = "dotted inner generator outside the wall"; continue; }
      gen = 0;
    } else if (se.form == EdgeForm::CircForm && jr == d.k()) {
      gen = d.family == Family::AffineB ? d.n + 1 : d.n + 2;
    } else {
      gen = se.col + jl - 1;
    }
    // rebuild: ambient = margins + markers + modified window
    Snapshot snap = ranked_snapshot(d);
    CpCandidate cand;
    const long long window_shift = 1000000;
    for (size_t ei = 0; ei < snap.edges.size(); ++ei) {
      const auto& e = d.edges[ei];
      int ca = d.node_col(e.a), cb = d.node_col(e.b);
      if (ca >= jl && ca <= jr && cb >= jl && cb <= jr) continue;  // window content
      cand.edges.push_back(snap.edges[ei]);
    }
    for (size_t li = 0; li < snap.loops.size(); ++li)
      if (d.loops[li].word.size() < 2) cand.loops.push_back(snap.loops[li]);
    Diagram win = inner_next;
    if (d.family == Family::AffineB && jr < d.k()) {
      // strip the completion circles nearest the window boundary
      for (int node : {khat - 1, 2 * khat - 1}) {
        for (auto& e : win.edges) {
          if (e.a != node && e.b != node) continue;
          if (e.b == node) {
            if (!e.seq.empty() && e.seq.back() == Decor::Circ) e.seq.pop_back();
          } else {
            if (!e.seq.empty() && e.seq.front() == Decor::Circ) e.seq.erase(e.seq.begin());
          }
          break;
        }
      }
    }
    Snapshot wsnap = ranked_snapshot(win);
    auto map_node = [&](int v) {
      int c = v < khat ? v + 1 : v - khat + 1;
      int amb = c + jl - 1;
      return v < khat ? amb - 1 : amb - 1 + d.k();
    };
    for (auto& e : wsnap.edges) {
      RawEdge ne{map_node(e.a), map_node(e.b), e.seq};
      for (auto& rd : ne.seq) rd.rank += window_shift;
      if (ne.a > ne.b) {
        std::swap(ne.a, ne.b);
        std::reverse(ne.seq.begin(), ne.seq.end());
      }
      cand.edges.push_back(std::move(ne));
    }
    for (auto& l : wsnap.loops) {
      RawLoop nl = l;
      for (auto& rd : nl.word) rd.rank += window_shift;
      cand.loops.push_back(std::move(nl));
    }
    if (auto res = try_candidate(d, gen, cand)) return {gen, *res, "inner"};
    // the marker loop may sit below the window: retry with shifted ranks
    CpCandidate low = cand;
    for (auto& l : low.loops)
      if (l.word.size() == 1) l.word[0].rank += 2 * window_shift;
    if (auto res = try_candidate(d, gen, low)) return {gen, *res, "inner(marker-low)"};
    last_err = "re-embedded candidate failed validation";
  }
  throw InternalAssertionError("inner-window factorization step failed: " + last_err);
}

inline Factorization factorize_impl(const Diagram& d0) {
  Factorization out;
  Diagram d = d0;
  long long guard = diagram_length(d) + 1;
  while (!d.is_identity()) {
    if (--guard < 0) throw NonTerminatingError("factorize did not terminate");
    AdmissibleClass cls = classify_diagram(d);
    if (cls.tag == HeapFamilyTag::PZZ) {
      Word w = pzz_word(d, cls);
      Diagram check = theta_diagram(w, CoxeterSpec(d.family, d.n));
      if (check != d || (long long)w.size() != diagram_length(d))
        throw InternalAssertionError("PZZ closed form does not reproduce the diagram");
      for (int g : w) out.word.push_back(g);
      out.steps.push_back({"pzz", "", pzz_type_name(d.family, cls.pzz_type), -1});
      return out;
    }
    if (cls.tag == HeapFamilyTag::ALT) {
      SuitableEdge se = suitable_edge(d);
      auto [g, nd] = cut_and_paste(d, se);
      out.word.push_back(g);
      out.steps.push_back({"cp",
                           "{" + std::to_string(se.col) + "," + std::to_string(se.col + 1) + "}",
                           edge_type_name(se.type), g});
      d = std::move(nd);
      continue;
    }
    // P-diagram: try the peak operation, fall back to the inner window
    try {
      auto [g, nd] = k_operation(d);
      out.word.push_back(g);
      out.steps.push_back({cls.tag == HeapFamilyTag::RP ? "K_R" : "K_L", "", "", g});
      d = std::move(nd);
      continue;
    } catch (const PreconditionNotMetError&) {
    }
    StepResult sr = p_step_via_inner(d, cls);
    out.word.push_back(sr.generator);
    out.steps.push_back({"inner-cp", sr.note, "", sr.generator});
    d = std::move(sr.next);
  }
  return out;
}

}  // namespace detail

// Factorizes an admissible diagram into a reduced FC word with theta(word)
// equal to the diagram.
inline Factorization factorize_with_trace(const Diagram& d) {
  auto chk = is_admissible(d);
  if (!chk.ok) throw NotAdmissibleError("factorize: " + chk.violation);
  return detail::factorize_impl(d);
}

inline Word factorize(const Diagram& d) { return factorize_with_trace(d).word; }

}  // namespace tldiag
