#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tldiag/coxeter.hpp"
#include "tldiag/errors.hpp"

namespace tldiag {

enum class HeapFamilyTag : uint8_t { ALT, PZZ, LP, RP, LRP };

inline const char* family_tag_name(HeapFamilyTag t) {
  switch (t) {
    case HeapFamilyTag::ALT: return "ALT";
    case HeapFamilyTag::PZZ: return "PZZ";
    case HeapFamilyTag::LP: return "LP";
    case HeapFamilyTag::RP: return "RP";
    case HeapFamilyTag::LRP: return "LRP";
  }
  return "?";
}

struct HeapFamily {
  HeapFamilyTag tag = HeapFamilyTag::ALT;
  int j_left = -1;   // LP / LRP peak position
  int j_right = -1;  // RP / LRP peak position
};

// Labeled heap of a commutation class.  Elements are indexed by position in
// the canonical word; i precedes j when i < j and the labels do not commute.
struct Heap {
  CoxeterSpec spec;
  std::vector<int> labels;                    // element -> generator
  std::vector<std::pair<int, int>> covers;    // cover pairs (below, above) in <=
  std::vector<std::vector<int>> layers;       // Cartier-Foata layers of labels
  Word canonical_word;

  size_t size() const { return labels.size(); }

  bool operator==(const Heap& o) const {
    return spec == o.spec && canonical_word == o.canonical_word;
  }
  bool operator<(const Heap& o) const { return canonical_word < o.canonical_word; }
};

namespace detail {

// Order relation matrix for word positions: less[i][j] iff i comes before j
// in every expression of the class.
inline std::vector<std::vector<bool>> heap_order(const Word& w, const CoxeterSpec& spec) {
  size_t l = w.size();
  std::vector<std::vector<bool>> less(l, std::vector<bool>(l, false));
  for (size_t i = 0; i < l; ++i)
    for (size_t j = i + 1; j < l; ++j)
      if (!commute(spec, w[i], w[j])) less[i][j] = true;
  for (size_t k = 0; k < l; ++k)
    for (size_t i = 0; i < l; ++i)
      if (less[i][k])
        for (size_t j = 0; j < l; ++j)
          if (less[k][j]) less[i][j] = true;
  return less;
}

inline Heap heap_unchecked(const Word& w, const CoxeterSpec& spec) {
  Word canon = canonical_fc_word(w, spec);
  Heap h;
  h.spec = spec;
  h.canonical_word = canon;
  h.labels = canon;
  auto less = heap_order(canon, spec);
  size_t l = canon.size();
  for (size_t i = 0; i < l; ++i)
    for (size_t j = i + 1; j < l; ++j) {
      if (!less[i][j]) continue;
      bool cover = true;
      for (size_t k = i + 1; k < j && cover; ++k)
        if (less[i][k] && less[k][j]) cover = false;
      if (cover) h.covers.emplace_back((int)i, (int)j);
    }
  // Cartier-Foata layers: repeatedly strip the minimal elements.
  std::vector<bool> removed(l, false);
  size_t left = l;
  while (left > 0) {
    std::vector<int> layer;
    std::vector<size_t> picks;
    for (size_t j = 0; j < l; ++j) {
      if (removed[j]) continue;
      bool minimal = true;
      for (size_t i = 0; i < j && minimal; ++i)
        if (!removed[i] && less[i][j]) minimal = false;
      if (minimal) picks.push_back(j);
    }
    for (size_t p : picks) {
      removed[p] = true;
      layer.push_back(canon[p]);
      --left;
    }
    std::sort(layer.begin(), layer.end());
    h.layers.push_back(layer);
  }
  return h;
}

}  // namespace detail

// Heap of a reduced word.  Throws NotReducedError on non-reduced input and
// never silently reduces.
inline Heap heap_from_word(const Word& w, const CoxeterSpec& spec) {
  check_word(w, spec);
  if (classify_word(w, spec) == WordStatus::NotReduced)
    throw NotReducedError("heap_from_word: " + word_to_string(w) + " is not reduced");
  return detail::heap_unchecked(w, spec);
}

// Subheap induced by the elements with labels in I: restrict the canonical
// word and rebuild (Viennot's subheap of pieces).
inline Heap subheap(const Heap& h, const std::set<int>& I) {
  Word restricted;
  for (int g : h.canonical_word)
    if (I.count(g)) restricted.push_back(g);
  return detail::heap_unchecked(restricted, h.spec);
}

// A heap is alternating when, for each bond m_st >= 3, the chain of
// {s,t}-labeled elements alternates between s and t.
inline bool is_alternating(const Heap& h) {
  const CoxeterSpec& spec = h.spec;
  int g = spec.num_generators();
  for (int s = 0; s < g; ++s) {
    for (int t = s + 1; t < g; ++t) {
      if (bond(spec, s, t) < 3) continue;
      int prev = -1;
      for (int x : h.canonical_word) {
        if (x != s && x != t) continue;
        if (x == prev) return false;
        prev = x;
      }
    }
  }
  return true;
}

namespace detail {

// The 1-element column of a type-B~ heap: the {s0, s1} letters of the
// canonical word in order.  Used by the (ALT) family clause.
inline bool one_elements_alternate(const Heap& h) {
  int prev = -1;
  for (int x : h.canonical_word) {
    if (x != 0 && x != 1) continue;
    if (x == prev) return false;
    prev = x;
  }
  return true;
}

// Word of the left peak P_<-(s_j): s_j s_{j-1} ... s_2 s_0 s_1 s_2 ... s_j.
inline Word left_peak_word(int j) {
  Word w;
  for (int i = j; i >= 2; --i) w.push_back(i);
  w.push_back(0);
  w.push_back(1);
  for (int i = 2; i <= j; ++i) w.push_back(i);
  return w;
}

// Word of the right peak P_->(s_j): s_j ... s_n s_{n+1} s_n ... s_j.
inline Word right_peak_word(int j, int n) {
  Word w;
  for (int i = j; i <= n; ++i) w.push_back(i);
  w.push_back(n + 1);
  for (int i = n; i >= j; --i) w.push_back(i);
  return w;
}

// Positions (in canonical word order) of the elements labeled g.
inline std::vector<size_t> label_positions(const Heap& h, int g) {
  std::vector<size_t> out;
  for (size_t i = 0; i < h.canonical_word.size(); ++i)
    if (h.canonical_word[i] == g) out.push_back(i);
  return out;
}

// True when some element labeled `between` lies strictly between the two
// given positions in the heap order.
inline bool has_label_between(const Heap& h, size_t lo, size_t hi, int between) {
  auto less = heap_order(h.canonical_word, h.spec);
  for (size_t k = 0; k < h.canonical_word.size(); ++k)
    if (h.canonical_word[k] == between && less[lo][k] && less[k][hi]) return true;
  return false;
}

// Alternation test after identifying the two occurrences of `ident` (both
// labels in `keep`): drop the second occurrence of each identified label
// from the restricted word and test alternation of the rest.
inline bool alternating_with_identification(const Heap& h, const std::set<int>& keep,
                                            const std::set<int>& ident) {
  Word restricted;
  std::set<int> dropped;
  for (int g : h.canonical_word) {
    if (!keep.count(g)) continue;
    if (ident.count(g)) {
      if (dropped.count(g)) continue;  // skip every later occurrence once
      bool already = false;
      for (int x : restricted)
        if (x == g) already = true;
      if (already) {
        dropped.insert(g);
        continue;
      }
    }
    restricted.push_back(g);
  }
  return is_alternating(heap_unchecked(restricted, h.spec));
}

// PZZ membership for type B~: the canonical heap equals the heap of some
// factor of (s0 s1 s2 ... s_n s_{n+1} s_n ... s2)^infinity that contains
// s_n s_{n+1} s_n and s0 s1.
inline bool is_pzz_heap_B(const Heap& h) {
  const int n = h.spec.n;
  const size_t len = h.size();
  if (len < 2 * (size_t)n + 3) return false;  // needs a full left and right visit
  Word period;
  period.push_back(0);
  period.push_back(1);
  for (int i = 2; i <= n; ++i) period.push_back(i);
  period.push_back(n + 1);
  for (int i = n; i >= 2; --i) period.push_back(i);
  const size_t p = period.size();  // 2n + 1
  for (size_t off = 0; off < p; ++off) {
    Word factor(len);
    for (size_t i = 0; i < len; ++i) factor[i] = period[(off + i) % p];
    // factor must contain s_n s_{n+1} s_n and the pair s0 s1
    bool has_right = false, has_pair = false;
    for (size_t i = 0; i + 2 < len; ++i)
      if (factor[i] == n && factor[i + 1] == n + 1 && factor[i + 2] == n) has_right = true;
    for (size_t i = 0; i + 1 < len; ++i)
      if ((factor[i] == 0 && factor[i + 1] == 1) || (factor[i] == 1 && factor[i + 1] == 0))
        has_pair = true;
    if (!has_right || !has_pair) continue;
    if (classify_word(factor, h.spec) != WordStatus::FCReduced) continue;
    if (canonical_fc_word(factor, h.spec) == h.canonical_word) return true;
  }
  return false;
}

inline std::optional<int> find_lp_peak(const Heap& h) {
  const int n = h.spec.n;
  for (int j = 2; j <= n; ++j) {
    std::set<int> left;
    left.insert(0);
    left.insert(1);
    for (int i = 2; i <= j; ++i) left.insert(i);
    Heap sub = subheap(h, left);
    Heap peak = heap_unchecked(left_peak_word(j), h.spec);
    if (!(sub == peak)) continue;
    auto js = label_positions(h, j);
    if (js.size() != 2) continue;
    if (has_label_between(h, js[0], js[1], j + 1)) continue;
    std::set<int> right;
    for (int i = j; i <= n + 1; ++i) right.insert(i);
    if (!alternating_with_identification(h, right, {j})) continue;
    return j;
  }
  return std::nullopt;
}

inline std::optional<int> find_rp_peak(const Heap& h) {
  const int n = h.spec.n;
  for (int j = 2; j <= n; ++j) {
    std::set<int> right;
    for (int i = j; i <= n + 1; ++i) right.insert(i);
    Heap sub = subheap(h, right);
    Heap peak = heap_unchecked(right_peak_word(j, n), h.spec);
    if (!(sub == peak)) continue;
    auto js = label_positions(h, j);
    if (js.size() != 2) continue;
    if (has_label_between(h, js[0], js[1], j - 1)) continue;
    std::set<int> left;
    left.insert(0);
    left.insert(1);
    for (int i = 2; i <= j; ++i) left.insert(i);
    if (!alternating_with_identification(h, left, {j})) continue;
    return j;
  }
  return std::nullopt;
}

inline bool is_lrp_heap(const Heap& h, int& jl, int& jr) {
  const int n = h.spec.n;
  for (int a = 2; a <= n; ++a) {
    std::set<int> left;
    left.insert(0);
    left.insert(1);
    for (int i = 2; i <= a; ++i) left.insert(i);
    Heap subl = subheap(h, left);
    if (!(subl == heap_unchecked(left_peak_word(a), h.spec))) continue;
    auto as = label_positions(h, a);
    if (as.size() != 2 || has_label_between(h, as[0], as[1], a + 1)) continue;
    for (int b = a + 1; b <= n; ++b) {
      std::set<int> right;
      for (int i = b; i <= n + 1; ++i) right.insert(i);
      Heap subr = subheap(h, right);
      if (!(subr == heap_unchecked(right_peak_word(b, n), h.spec))) continue;
      auto bs = label_positions(h, b);
      if (bs.size() != 2 || has_label_between(h, bs[0], bs[1], b - 1)) continue;
      std::set<int> mid;
      for (int i = a; i <= b; ++i) mid.insert(i);
      if (!alternating_with_identification(h, mid, {a, b})) continue;
      jl = a;
      jr = b;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Five-family classification of FC heaps of type B~ (PZZ tested first, then
// LRP, LP, RP, ALT).  Throws NotFCError when no family matches.
inline HeapFamily classify_family_B(const Heap& h) {
  if (h.spec.family != Family::AffineB)
    throw InvalidInputError("classify_family_B expects a type-B~ heap");
  HeapFamily out;
  if (detail::is_pzz_heap_B(h)) {
    out.tag = HeapFamilyTag::PZZ;
    return out;
  }
  int jl = -1, jr = -1;
  if (detail::is_lrp_heap(h, jl, jr)) {
    out.tag = HeapFamilyTag::LRP;
    out.j_left = jl;
    out.j_right = jr;
    return out;
  }
  if (auto j = detail::find_lp_peak(h)) {
    out.tag = HeapFamilyTag::LP;
    out.j_left = *j;
    return out;
  }
  if (auto j = detail::find_rp_peak(h)) {
    out.tag = HeapFamilyTag::RP;
    out.j_right = *j;
    return out;
  }
  if (is_alternating(h) && detail::one_elements_alternate(h)) {
    out.tag = HeapFamilyTag::ALT;
    return out;
  }
  throw NotFCError("heap of " + word_to_string(h.canonical_word) +
                   " matches no B~ family (not FC)");
}

namespace detail {

// Replaces the s_{n+1} occurrences of a B~ word as directed: `mode[k]` gives
// the replacement of the k-th occurrence: 0 -> t_{n+1} t_{n+2},
// 1 -> t_{n+1}, 2 -> t_{n+2}.
inline Word substitute_right_fork(const Word& w, int n, const std::vector<int>& mode) {
  Word out;
  size_t k = 0;
  for (int g : w) {
    if (g == n + 1) {
      int m = mode.at(k++);
      if (m == 0) {
        out.push_back(n + 1);
        out.push_back(n + 2);
      } else if (m == 1) {
        out.push_back(n + 1);
      } else {
        out.push_back(n + 2);
      }
    } else {
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace detail

// Delta_D substitution: heaps of type D~_{n+2} deduced from an FC heap of
// type B~_{n+1}.  The result does not depend on the chosen word.
inline std::set<Heap> delta_D(const Heap& h) {
  if (h.spec.family != Family::AffineB)
    throw InvalidInputError("delta_D expects a type-B~ heap");
  const int n = h.spec.n;
  CoxeterSpec dspec(Family::AffineD, n);
  HeapFamily fam = classify_family_B(h);  // throws NotFC when not FC
  const Word& w = h.canonical_word;
  auto occ = detail::label_positions(h, n + 1);
  std::set<Heap> out;
  auto push = [&](const Word& v) {
    if (classify_word(v, dspec) != WordStatus::FCReduced)
      throw InternalAssertionError("delta_D produced a non-FC word " + word_to_string(v));
    out.insert(detail::heap_unchecked(v, dspec));
  };
  if (fam.tag == HeapFamilyTag::RP || fam.tag == HeapFamilyTag::LRP) {
    push(detail::substitute_right_fork(w, n, std::vector<int>(occ.size(), 0)));
    return out;
  }
  if (fam.tag == HeapFamilyTag::PZZ) {
    // boundary occurrences (first minimal / last maximal) may also become a
    // single t_{n+1} or t_{n+2}
    auto less = detail::heap_order(w, h.spec);
    bool first_min = true, last_max = true;
    for (size_t k = 0; k < w.size(); ++k) {
      if (less[k][occ.front()]) first_min = false;
      if (less[occ.back()][k]) last_max = false;
    }
    std::vector<int> first_opts = first_min ? std::vector<int>{0, 1, 2} : std::vector<int>{0};
    std::vector<int> last_opts = last_max ? std::vector<int>{0, 1, 2} : std::vector<int>{0};
    if (occ.size() == 1) {
      // a single boundary occurrence takes each option once
      std::set<int> opts(first_opts.begin(), first_opts.end());
      opts.insert(last_opts.begin(), last_opts.end());
      for (int m : opts) push(detail::substitute_right_fork(w, n, {m}));
      return out;
    }
    for (int a : first_opts)
      for (int b : last_opts) {
        std::vector<int> mode(occ.size(), 0);
        mode.front() = a;
        mode.back() = b;
        push(detail::substitute_right_fork(w, n, mode));
      }
    return out;
  }
  // ALT or LP
  if (occ.empty()) {
    push(w);
    return out;
  }
  if (occ.size() == 1) {
    for (int m : {0, 1, 2}) push(detail::substitute_right_fork(w, n, {m}));
    return out;
  }
  for (int start : {1, 2}) {
    std::vector<int> mode(occ.size());
    for (size_t k = 0; k < occ.size(); ++k)
      mode[k] = (k % 2 == 0) ? start : (start == 1 ? 2 : 1);
    push(detail::substitute_right_fork(w, n, mode));
  }
  return out;
}

// Family of an FC heap of type D~: the tag of the B~ family whose Delta_D
// image contains it, found by projecting t_{n+1}, t_{n+2} back to s_{n+1}
// (fused when the two elements are incomparable).
inline HeapFamily classify_family_D(const Heap& h) {
  if (h.spec.family != Family::AffineD)
    throw InvalidInputError("classify_family_D expects a type-D~ heap");
  const int n = h.spec.n;
  CoxeterSpec bspec(Family::AffineB, n);
  const Word& w = h.canonical_word;
  auto less = detail::heap_order(w, h.spec);
  std::vector<bool> skip(w.size(), false);
  // fuse incomparable {t_{n+1}, t_{n+2}} pairs: drop the later element
  for (size_t i = 0; i < w.size(); ++i) {
    if (skip[i] || (w[i] != n + 1 && w[i] != n + 2)) continue;
    for (size_t j = i + 1; j < w.size(); ++j) {
      if (skip[j]) continue;
      if ((w[j] == n + 1 || w[j] == n + 2) && w[j] != w[i] && !less[i][j] && !less[j][i]) {
        skip[j] = true;
        break;
      }
    }
  }
  Word projected;
  for (size_t i = 0; i < w.size(); ++i) {
    if (skip[i]) continue;
    projected.push_back(std::min(w[i], n + 1));
  }
  if (classify_word(projected, bspec) != WordStatus::FCReduced)
    throw NotFCError("projection of " + word_to_string(w) + " is not FC in B~");
  Heap hb = detail::heap_unchecked(projected, bspec);
  HeapFamily fam = classify_family_B(hb);
  // sanity: h must lie in the Delta_D image of its projection
  if (!delta_D(hb).count(h))
    throw NotFCError("heap " + word_to_string(w) + " is not in the Delta_D image");
  return fam;
}

}  // namespace tldiag
