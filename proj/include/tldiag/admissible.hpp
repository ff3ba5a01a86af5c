#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "tldiag/diagram.hpp"
#include "tldiag/heap.hpp"

namespace tldiag {

// PZZ subtype by the relative heights of the highest/lowest R-marker versus
// the highest/lowest L-marker (R = triangle in family B, circle loop in
// family D; L = dotted loop).
enum class PzzType : uint8_t { RR, RDot, DotR, DotDot };

inline const char* pzz_type_name(Family fam, PzzType t) {
  if (fam == Family::AffineB) {
    switch (t) {
      case PzzType::RR: return "<tt>";
      case PzzType::RDot: return "<td>";
      case PzzType::DotR: return "<dt>";
      case PzzType::DotDot: return "<dd>";
    }
  }
  switch (t) {
    case PzzType::RR: return "<oo>";
    case PzzType::RDot: return "<od>";
    case PzzType::DotR: return "<do>";
    case PzzType::DotDot: return "<dd>";
  }
  return "?";
}

struct AdmissibleClass {
  HeapFamilyTag tag = HeapFamilyTag::ALT;
  PzzType pzz_type = PzzType::RR;
  int l = 0, r = 0;          // PZZ marker counts
  int i = 0, j = 0;          // PZZ north/south cup positions
  int j_left = -1, j_right = -1;  // P-diagram margins
};

// --- standard-representation crossing counts ----------------------------------

// nu_i(D): non-loop edges crossing the vertical line i+1/2, i = 1..n+1.
inline std::vector<int> nu_counts(const Diagram& d) {
  std::vector<int> nu(d.k(), 0);  // index 1..n+1 used
  for (const auto& e : d.edges) {
    int lo = d.node_col(e.a), hi = d.node_col(e.b);
    if (lo > hi) std::swap(lo, hi);
    for (int c = lo; c < hi; ++c) nu[c]++;
  }
  return nu;
}

inline int nu_total(const Diagram& d) {
  auto nu = nu_counts(d);
  int s = 0;
  for (int i = 1; i <= d.n + 1; ++i) s += nu[i];
  return s;
}

// --- edge and loop weights -----------------------------------------------------

// Weight of a non-loop edge from its decoration pattern; circles are ignored
// in family B and counted as the R-decoration in family D.
inline long long edge_weight(const DiagEdge& e, const Diagram& d) {
  std::vector<Decor> seq;
  for (Decor x : e.seq) {
    if (d.family == Family::AffineB && x == Decor::Circ) continue;
    seq.push_back(x);
  }
  if (seq.empty()) return 0;
  for (size_t p = 0; p + 1 < seq.size(); ++p)
    if (is_left_decor(seq[p]) == is_left_decor(seq[p + 1]))
      throw InternalAssertionError("edge_weight: block does not alternate");
  const long long n = d.n;
  long long i = d.node_col(e.a), j = d.node_col(e.b);
  bool swapped = false;
  if (Diagram::edge_is_prop(e, d.k()) && i > j) swapped = true;
  size_t m = seq.size();
  bool first_dot = is_left_decor(seq.front());
  bool last_dot = is_left_decor(seq.back());
  if (first_dot && last_dot) {
    long long kk = (long long)(m - 1) / 2;
    return (swapped ? j - 1 : i - 1) + kk * (n + 1);
  }
  if (!first_dot && !last_dot) {
    long long kk = (long long)(m - 1) / 2;
    return (swapped ? n + 2 - i : n + 2 - j) + kk * (n + 1);
  }
  long long kk = (long long)m / 2;  // (k+1) in the paper's notation
  if (first_dot && !last_dot) return swapped ? kk * (n + 1) : kk * (n + 1) - j + i;
  return swapped ? kk * (n + 1) - i + j : kk * (n + 1);
}

inline long long loop_weight(const DiagLoop& l, const Diagram& d) {
  if (l.word.size() == 1) return 1;
  if (l.word.size() == 2) return d.n + 1;
  throw InternalAssertionError("loop_weight: unexpected loop word");
}

inline long long weight_total(const Diagram& d) {
  long long w = 0;
  for (const auto& e : d.edges) w += edge_weight(e, d);
  for (const auto& l : d.loops) w += loop_weight(l, d);
  return w;
}

// --- classification ------------------------------------------------------------

namespace detail {

inline bool loop_word_is(const DiagLoop& l, std::initializer_list<Decor> w) {
  return l.word == std::vector<Decor>(w);
}

inline int count_loops(const Diagram& d, std::initializer_list<Decor> w) {
  int c = 0;
  for (const auto& l : d.loops)
    if (loop_word_is(l, w)) ++c;
  return c;
}

// Propagating edges ordered left to right.
inline std::vector<int> prop_edges_in_order(const Diagram& d) {
  std::vector<int> idx;
  for (size_t i = 0; i < d.edges.size(); ++i)
    if (Diagram::edge_is_prop(d.edges[i], d.k())) idx.push_back((int)i);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) {
    return d.node_col(d.edges[x].a) < d.node_col(d.edges[y].a);
  });
  return idx;
}

// True when the edge leaving column c (1-based) is an undecorated vertical.
inline bool trivial_vertical_at(const Diagram& d, int c) {
  const DiagEdge* e = d.edge_at(c - 1);
  return e && e->b == e->a + d.k() && e->seq.empty();
}

// Smallest column whose edge is not an undecorated vertical.
inline int first_nontrivial_col(const Diagram& d) {
  for (int c = 1; c <= d.k(); ++c)
    if (!trivial_vertical_at(d, c)) return c;
  return d.k() + 1;
}

// Largest column <= n+1 whose edge is not an undecorated vertical.
inline int last_nontrivial_col_before_end(const Diagram& d) {
  for (int c = d.n + 1; c >= 1; --c)
    if (!trivial_vertical_at(d, c)) return c;
  return 0;
}

// The vertical {n+2, (n+2)'} decorated with a single triangle (family B's
// right-peak marker).
inline bool has_tri_vertical(const Diagram& d) {
  const DiagEdge* e = d.edge_at(d.k() - 1);
  return e && e->b == e->a + d.k() && e->seq == std::vector<Decor>{Decor::Tri};
}

// Mid positions of the L-markers (dots on dotted loops) and R-markers
// (triangles in family B; circles on circle loops in family D).
inline void marker_positions(const Diagram& d, std::vector<int>& lpos,
                             std::vector<int>& rpos) {
  lpos.clear();
  rpos.clear();
  for (size_t t = 0; t < d.mid.size(); ++t) {
    const MidEvent& ev = d.mid[t];
    Decor dec = ev.on_loop ? d.loops[ev.idx].word[ev.pos] : d.edges[ev.idx].seq[ev.pos];
    if (ev.on_loop && dec == Decor::Dot && d.loops[ev.idx].word.size() == 1)
      lpos.push_back((int)t);
    if (d.family == Family::AffineB) {
      if (dec == Decor::Tri) rpos.push_back((int)t);
    } else {
      if (ev.on_loop && dec == Decor::Circ && d.loops[ev.idx].word.size() == 1)
        rpos.push_back((int)t);
    }
  }
}

}  // namespace detail

// Classifies an admissible diagram into PZZ / LP / RP / LRP / ALT with its
// parameters.  Precedence: PZZ, LRP, LP, RP, ALT.
inline AdmissibleClass classify_diagram(const Diagram& d) {
  AdmissibleClass out;
  if (d.is_identity()) return out;  // ALT
  const int a = d.a_count();
  const int l_loops = detail::count_loops(d, {Decor::Dot});
  int r_markers;
  if (d.family == Family::AffineB) {
    r_markers = 0;
    auto props = detail::prop_edges_in_order(d);
    if (!props.empty())
      for (Decor dec : d.edges[props.back()].seq)
        if (dec == Decor::Tri) ++r_markers;
  } else {
    r_markers = detail::count_loops(d, {Decor::Circ});
  }
  if (a == 1 && l_loops >= 1 && r_markers >= 1) {
    out.tag = HeapFamilyTag::PZZ;
    out.l = l_loops;
    out.r = r_markers;
    for (const auto& e : d.edges) {
      if (Diagram::edge_is_north(e, d.k())) out.i = d.node_col(e.a);
      if (Diagram::edge_is_south(e, d.k())) out.j = d.node_col(e.a);
    }
    std::vector<int> lp, rp;
    detail::marker_positions(d, lp, rp);
    if (lp.empty() || rp.empty())
      throw InternalAssertionError("PZZ classification without markers");
    bool high_r = rp.front() < lp.front();  // highest R above highest L
    bool low_r = rp.back() > lp.back();     // lowest R below lowest L
    out.pzz_type = high_r ? (low_r ? PzzType::RR : PzzType::RDot)
                          : (low_r ? PzzType::DotR : PzzType::DotDot);
    return out;
  }
  const int jl = detail::first_nontrivial_col(d);
  const int jr = detail::last_nontrivial_col_before_end(d);
  bool lp_marker = l_loops == 1;
  bool rp_marker = d.family == Family::AffineB
                       ? detail::has_tri_vertical(d)
                       : (detail::count_loops(d, {Decor::Circ}) == 1 &&
                          detail::trivial_vertical_at(d, d.k()));
  if (a > 1 && lp_marker && rp_marker && jl >= 2 && jr >= 1 && jl < jr) {
    out.tag = HeapFamilyTag::LRP;
    out.j_left = jl;
    out.j_right = jr;
    return out;
  }
  if (lp_marker && !rp_marker && jl >= 2) {
    out.tag = HeapFamilyTag::LP;
    out.j_left = jl;
    return out;
  }
  if (rp_marker && !lp_marker && jr >= 1) {
    out.tag = HeapFamilyTag::RP;
    out.j_right = jr;
    return out;
  }
  out.tag = HeapFamilyTag::ALT;
  return out;
}

// Inner alternating diagram of a P-diagram: the window between the margin
// verticals, relabeled to its own box, with the circle completion applied in
// family B so that the result is a genuine ALT-diagram.
inline Diagram inner_diagram(const Diagram& d) {
  AdmissibleClass cls = classify_diagram(d);
  if (cls.tag != HeapFamilyTag::LP && cls.tag != HeapFamilyTag::RP &&
      cls.tag != HeapFamilyTag::LRP)
    throw InvalidInputError("inner_diagram: not a P-diagram");
  int jl = cls.tag == HeapFamilyTag::RP ? 1 : cls.j_left;
  int jr = cls.tag == HeapFamilyTag::LP ? d.k() : cls.j_right;
  int kk = jr - jl + 1;
  int khat = kk;
  std::vector<DiagEdge> edges;
  std::vector<DiagLoop> loops;
  std::vector<MidEvent> mid;
  std::vector<int> edge_map(d.edges.size(), -1), loop_map(d.loops.size(), -1);
  auto map_node = [&](int v) {
    int c = d.node_col(v) - jl + 1;
    return d.is_north_node(v) ? c - 1 : khat + c - 1;
  };
  for (size_t ei = 0; ei < d.edges.size(); ++ei) {
    const auto& e = d.edges[ei];
    int ca = d.node_col(e.a), cb = d.node_col(e.b);
    bool ina = ca >= jl && ca <= jr, inb = cb >= jl && cb <= jr;
    if (ina != inb) throw InternalAssertionError("inner_diagram: edge crosses the window");
    if (!ina) continue;
    edge_map[ei] = (int)edges.size();
    edges.push_back({map_node(e.a), map_node(e.b), e.seq});
  }
  for (size_t li = 0; li < d.loops.size(); ++li) {
    if (d.loops[li].word.size() < 2) continue;  // marker loops stay outside
    loop_map[li] = (int)loops.size();
    loops.push_back(d.loops[li]);
  }
  for (const auto& ev : d.mid) {
    int m = ev.on_loop ? loop_map[ev.idx] : edge_map[ev.idx];
    if (m < 0) continue;
    mid.push_back({ev.on_loop, m, ev.pos});
  }
  // circle completion at the cut boundary (family B, inner windows only)
  std::vector<MidEvent> mid_front, mid_back;
  if (d.family == Family::AffineB && jr < d.k()) {
    int north_right = khat - 1, south_right = 2 * khat - 1;
    for (int node : {north_right, south_right}) {
      for (size_t ei = 0; ei < edges.size(); ++ei) {
        auto& e = edges[ei];
        if (e.a != node && e.b != node) continue;
        bool prop = e.a < khat && e.b >= khat;
        if (e.b == node) {
          e.seq.push_back(Decor::Circ);
          if (prop) mid_back.push_back({false, (int)ei, (int)e.seq.size() - 1});
        } else {
          e.seq.insert(e.seq.begin(), Decor::Circ);
          if (prop) {
            for (auto& ev : mid)
              if (!ev.on_loop && ev.idx == (int)ei) ev.pos++;
            for (auto& ev : mid_back)
              if (ev.idx == (int)ei) ev.pos++;
            mid_front.push_back({false, (int)ei, 0});
          }
        }
        break;
      }
    }
  }
  std::vector<MidEvent> full_mid = mid_front;
  full_mid.insert(full_mid.end(), mid.begin(), mid.end());
  full_mid.insert(full_mid.end(), mid_back.begin(), mid_back.end());
  Reduction r = reduce_concrete(d.family, khat - 2, edges, loops, full_mid);
  if (!r.coeff.is_one())
    throw InternalAssertionError("inner_diagram: window content was reducible");
  return r.diagram;
}

// Length of an admissible diagram.
inline long long diagram_length(const Diagram& d) {
  if (d.is_identity()) return 0;
  AdmissibleClass cls = classify_diagram(d);
  const long long n = d.n;
  switch (cls.tag) {
    case HeapFamilyTag::ALT:
      return nu_total(d) / 2 + weight_total(d);
    case HeapFamilyTag::PZZ: {
      long long l = cls.l, r = cls.r, i = cls.i, j = cls.j;
      if (d.family == Family::AffineB) {
        switch (cls.pzz_type) {
          case PzzType::RR: return 3 - i - j + (l + r + 1) * n + l;
          case PzzType::RDot: return 1 - i + j + (l + r) * n + l;
          case PzzType::DotR: return 1 + i - j + (l + r) * n + l;
          case PzzType::DotDot: return i + j - 1 + (l + r - 1) * n + l;
        }
      }
      switch (cls.pzz_type) {
        case PzzType::RR: return 3 - i - j + (l + r + 1) * n + l + r;
        case PzzType::RDot: return 1 - i + j + (l + r) * n + l + r;
        case PzzType::DotR: return 1 + i - j + (l + r) * n + l + r;
        case PzzType::DotDot: return i + j - 1 + (l + r - 1) * n + l + r;
      }
      return 0;
    }
    case HeapFamilyTag::LP:
      return 2LL * cls.j_left - 1 + diagram_length(inner_diagram(d));
    case HeapFamilyTag::RP:
      return (d.family == Family::AffineB ? 2 * n - 2LL * cls.j_right + 4
                                          : 2 * n - 2LL * cls.j_right + 5) +
             diagram_length(inner_diagram(d));
    case HeapFamilyTag::LRP:
      return (d.family == Family::AffineB
                  ? 2 * n + 2LL * cls.j_left - 2 * cls.j_right + 3
                  : 2 * n + 2LL * cls.j_left - 2 * cls.j_right + 4) +
             diagram_length(inner_diagram(d));
  }
  return 0;
}

// --- admissibility --------------------------------------------------------------

struct AdmissibleCheck {
  bool ok = true;
  std::string violation;  // first violated clause, empty when ok
};

namespace detail {

inline bool alternates_lr(const std::vector<Decor>& seq) {
  for (size_t p = 0; p + 1 < seq.size(); ++p)
    if (is_left_decor(seq[p]) == is_left_decor(seq[p + 1])) return false;
  return true;
}

}  // namespace detail

// Checks the admissibility clauses; reports the first violated one.
inline AdmissibleCheck is_admissible(const Diagram& d) {
  auto fail = [](const std::string& why) { return AdmissibleCheck{false, why}; };
  try {
    detail::validate(d);
  } catch (const Error& e) {
    return fail(std::string("structure: ") + e.what());
  }
  // irreducibility: re-running the rewrite engine must not change anything
  {
    Reduction r = reduce_concrete(d.family, d.n, d.edges, d.loops, d.mid);
    if (!r.coeff.is_one() || r.diagram != d) return fail("not irreducible");
  }
  const int k = d.k();
  const int a = d.a_count();
  // (A1) loop inventory
  int l_dot = 0, l_circ = 0, l_big = 0;
  for (const auto& l : d.loops) {
    if (l.word == std::vector<Decor>{Decor::Dot}) ++l_dot;
    else if (d.family == Family::AffineD && l.word == std::vector<Decor>{Decor::Circ}) ++l_circ;
    else if (l.word.size() == 2) ++l_big;
    else return fail("(A1): loop of a disallowed type");
  }
  if (d.family == Family::AffineB) {
    if (l_dot > 0 && l_big > 0) return fail("(A1): loops must be of a unique type");
    if (a > 1 && l_dot > 1) return fail("(A1): at most one dotted loop when a(D)>1");
  } else {
    if (l_big > 0 && (l_dot > 0 || l_circ > 0))
      return fail("(A1): two-decoration loops exclude the plain ones");
    if (a > 1 && (l_dot > 1 || l_circ > 1))
      return fail("(A1): at most one plain loop of each color when a(D)>1");
  }
  auto count_edge_decor = [&](Decor dec) {
    int c = 0;
    for (const auto& e : d.edges)
      for (Decor x : e.seq)
        if (x == dec) ++c;
    return c;
  };
  if (a > 1) {
    int dots = count_edge_decor(Decor::Dot), circs = count_edge_decor(Decor::Circ);
    if (d.family == Family::AffineB) {
      if ((l_big + dots) % 2 != 0) return fail("(A2): dot count parity");
      if (circs != 0 && circs != 2) return fail("(A2): circle count must be 0 or 2");
      if (d.is_undammed()) {
        for (int node : {k - 1, 2 * k - 1}) {
          const DiagEdge* e = d.edge_at(node);
          if (!e || e->seq.empty() || e->seq.back() != Decor::Circ)
            return fail("(A3): circle must end the edges at the right wall");
        }
      }
      // (A4) the vertical {1,1'}
      if (const DiagEdge* e = d.edge_at(0); e && e->b == e->a + k && !e->seq.empty()) {
        bool single_tri = e->seq == std::vector<Decor>{Decor::Tri};
        bool alt = detail::alternates_lr(e->seq);
        bool only_dot_tri = true;
        for (Decor x : e->seq)
          if (x == Decor::Circ) only_dot_tri = false;
        if (!single_tri) {
          if (!(alt && only_dot_tri && d.loops.empty()))
            return fail("(A4): vertical {1,1'} decoration pattern");
        }
      }
      // (A4') edges at the right wall
      const DiagEdge* en = d.edge_at(k - 1);
      const DiagEdge* es = d.edge_at(2 * k - 1);
      if (en && en->b == k - 1 + k) {
        // vertical {n+2,(n+2)'}
        const auto& s = en->seq;
        bool okv = s.empty() || s == std::vector<Decor>{Decor::Tri} ||
                   (s.size() >= 2 && s.front() == Decor::Circ && s.back() == Decor::Circ &&
                    detail::alternates_lr(s));
        if (!okv) return fail("(A4'): vertical at the right wall");
      } else {
        for (const DiagEdge* e : {en, es}) {
          if (!e) continue;
          int c = 0;
          for (Decor x : e->seq)
            if (x == Decor::Circ) ++c;
          if (c != 1) return fail("(A4'): a unique circle must occur at the right wall");
        }
      }
    } else {
      if ((l_big + dots) % 2 != 0) return fail("(A2): dot count parity");
      if ((l_big + circs) % 2 != 0) return fail("(A2): circle count parity");
      // (A3) the boundary verticals
      const DiagEdge* w = d.edge_at(0);
      if (w && w->b == w->a + k && !w->seq.empty()) {
        if (w->seq == std::vector<Decor>{Decor::Circ}) {
          if (l_circ > 0) return fail("(A3): single circle on {1,1'} excludes circle loops");
        } else if (!(detail::alternates_lr(w->seq) && d.loops.empty())) {
          return fail("(A3): vertical {1,1'} decoration pattern");
        }
      }
      const DiagEdge* e = d.edge_at(k - 1);
      if (e && e->b == e->a + k && !e->seq.empty()) {
        if (e->seq == std::vector<Decor>{Decor::Dot}) {
          if (l_dot > 0) return fail("(A3): single dot on the right vertical excludes dotted loops");
        } else if (!(detail::alternates_lr(e->seq) && d.loops.empty())) {
          return fail("(A3): right vertical decoration pattern");
        }
      }
    }
  }
  if (a == 1) {
    auto props = detail::prop_edges_in_order(d);
    int leftmost = props.empty() ? -1 : props.front();
    int rightmost = props.empty() ? -1 : props.back();
    for (size_t ei = 0; ei < d.edges.size(); ++ei) {
      const auto& e = d.edges[ei];
      if (!Diagram::edge_is_prop(e, k)) continue;
      for (Decor x : e.seq) {
        if (is_left_decor(x) && (int)ei != leftmost)
          return fail("(A5): dot on a non-leftmost propagating edge");
        if (is_right_decor(x) && (int)ei != rightmost)
          return fail("(A5): R-decoration on a non-rightmost propagating edge");
      }
    }
    // the L and R mid markers must interleave strictly
    bool have_prev = false, prev_left = false;
    for (const auto& ev : d.mid) {
      Decor dec = ev.on_loop ? d.loops[ev.idx].word[ev.pos] : d.edges[ev.idx].seq[ev.pos];
      bool left = is_left_decor(dec);
      if (have_prev && left == prev_left)
        return fail("(A5): mid decorations of one kind at adjacent heights");
      prev_left = left;
      have_prev = true;
    }
  }
  return AdmissibleCheck{};
}

}  // namespace tldiag
