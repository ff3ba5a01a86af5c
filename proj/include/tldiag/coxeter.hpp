#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "tldiag/errors.hpp"

namespace tldiag {

enum class Family : uint8_t { AffineB, AffineD };

inline const char* family_name(Family f) {
  return f == Family::AffineB ? "B" : "D";
}

// Selects the Coxeter system: AffineB = B~_{n+1} on generators 0..n+1,
// AffineD = D~_{n+2} on generators 0..n+2.  Both act on (n+2)-boxes.
struct CoxeterSpec {
  Family family = Family::AffineB;
  int n = 2;

  CoxeterSpec() = default;
  CoxeterSpec(Family f, int n_) : family(f), n(n_) {
    if (n < 2) throw InvalidInputError("CoxeterSpec requires n >= 2");
  }

  int num_generators() const { return family == Family::AffineB ? n + 2 : n + 3; }
  int max_generator() const { return num_generators() - 1; }
  int box_width() const { return n + 2; }

  bool operator==(const CoxeterSpec& o) const {
    return family == o.family && n == o.n;
  }
};

using Word = std::vector<int>;

inline std::string word_to_string(const Word& w) {
  std::string s = "[";
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(w[i]);
  }
  return s + "]";
}

inline void check_word(const Word& w, const CoxeterSpec& spec) {
  for (int g : w)
    if (g < 0 || g > spec.max_generator())
      throw InvalidInputError("generator index " + std::to_string(g) +
                              " out of range for " + family_name(spec.family) +
                              " n=" + std::to_string(spec.n));
}

// Bond order m_st between generators s, t.
inline int bond(const CoxeterSpec& spec, int s, int t) {
  if (s == t) return 1;
  int a = std::min(s, t), b = std::max(s, t);
  const int n = spec.n;
  if (spec.family == Family::AffineB) {
    if (a == 0 && b == 1) return 2;
    if (a == 0 && b == 2) return 3;
    if (a == 1 && b == 2) return 3;
    if (a >= 2 && b == a + 1) return b == n + 1 ? 4 : 3;
    return 2;
  }
  // AffineD: forks at both ends, all bonds equal to 3.
  if (a == 0 && b == 1) return 2;
  if (a == 0 && b == 2) return 3;
  if (a == 1 && b == 2) return 3;
  if (b == n + 1 && a == n) return 3;
  if (b == n + 2 && a == n) return 3;
  if (a == n + 1 && b == n + 2) return 2;
  if (a >= 2 && b == a + 1 && b <= n) return 3;
  return 2;
}

inline bool commute(const CoxeterSpec& spec, int s, int t) {
  return bond(spec, s, t) == 2;
}

// Full symmetric Coxeter matrix; m[s][s] = 1.
inline std::vector<std::vector<int>> coxeter_matrix(const CoxeterSpec& spec) {
  int g = spec.num_generators();
  std::vector<std::vector<int>> m(g, std::vector<int>(g, 2));
  for (int s = 0; s < g; ++s)
    for (int t = 0; t < g; ++t) m[s][t] = bond(spec, s, t);
  return m;
}

namespace detail {

// Scans a word for a long braid factor s t s ... of length m_st >= 3.
inline bool has_braid_factor(const Word& w, const CoxeterSpec& spec) {
  for (size_t i = 0; i + 1 < w.size(); ++i) {
    int s = w[i], t = w[i + 1];
    if (s == t) continue;
    int m = bond(spec, s, t);
    if (m < 3) continue;
    if (i + (size_t)m > w.size()) continue;
    bool ok = true;
    for (int p = 0; p < m; ++p)
      if (w[i + p] != (p % 2 == 0 ? s : t)) { ok = false; break; }
    if (ok) return true;
  }
  return false;
}

inline bool has_adjacent_equal(const Word& w) {
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i] == w[i + 1]) return true;
  return false;
}

// Breadth-first closure of a word under adjacent commutations only.
// Visits at most `cap` words.  Calls `visit` on every member; if `visit`
// returns true the exploration stops early and true is returned.
template <class F>
bool explore_commutation_class(const Word& w, const CoxeterSpec& spec, F visit,
                               size_t cap = 2000000) {
  std::set<Word> seen;
  std::queue<Word> frontier;
  seen.insert(w);
  frontier.push(w);
  while (!frontier.empty()) {
    Word cur = frontier.front();
    frontier.pop();
    if (visit(cur)) return true;
    for (size_t i = 0; i + 1 < cur.size(); ++i) {
      if (cur[i] != cur[i + 1] && commute(spec, cur[i], cur[i + 1])) {
        Word next = cur;
        std::swap(next[i], next[i + 1]);
        if (seen.insert(next).second) {
          if (seen.size() > cap)
            throw ResourceLimitError("commutation class exploration exceeded cap");
          frontier.push(next);
        }
      }
    }
  }
  return false;
}

}  // namespace detail

// Tits-style verdict for an arbitrary word: closure under commutation and
// long-braid moves.  A word is reduced iff the closure never reaches an
// adjacent equal pair; a reduced word is FC iff the closure (then equal to
// the commutation class) contains no long braid factor.
enum class WordStatus { FCReduced, NotFCReduced, NotReduced };

inline WordStatus classify_word(const Word& w, const CoxeterSpec& spec,
                                size_t cap = 2000000) {
  check_word(w, spec);
  std::set<Word> seen;
  std::queue<Word> frontier;
  seen.insert(w);
  frontier.push(w);
  bool saw_braid = false;
  while (!frontier.empty()) {
    Word cur = frontier.front();
    frontier.pop();
    if (detail::has_adjacent_equal(cur)) return WordStatus::NotReduced;
    for (size_t i = 0; i + 1 < cur.size(); ++i) {
      int s = cur[i], t = cur[i + 1];
      if (s == t) continue;
      int m = bond(spec, s, t);
      if (m == 2) {
        Word next = cur;
        std::swap(next[i], next[i + 1]);
        if (seen.insert(next).second) {
          if (seen.size() > cap) throw ResourceLimitError("word closure exceeded cap");
          frontier.push(next);
        }
      } else if (i + (size_t)m <= cur.size()) {
        bool run = true;
        for (int p = 0; p < m; ++p)
          if (cur[i + p] != (p % 2 == 0 ? s : t)) { run = false; break; }
        if (run) {
          saw_braid = true;
          Word next = cur;
          for (int p = 0; p < m; ++p) next[i + p] = (p % 2 == 0 ? t : s);
          if (seen.insert(next).second) {
            if (seen.size() > cap) throw ResourceLimitError("word closure exceeded cap");
            frontier.push(next);
          }
        }
      }
    }
  }
  return saw_braid ? WordStatus::NotFCReduced : WordStatus::FCReduced;
}

// True iff w is a reduced expression of a fully commutative element.
// Throws NotReducedError when w is not reduced, so callers can tell
// "not FC" apart from "not a reduced word".
inline bool is_fully_commutative(const Word& w, const CoxeterSpec& spec) {
  switch (classify_word(w, spec)) {
    case WordStatus::FCReduced: return true;
    case WordStatus::NotFCReduced: return false;
    default:
      throw NotReducedError("word " + word_to_string(w) + " is not reduced");
  }
}

// Lexicographically least word in the commutation class of a reduced word.
// Greedy heap reading: repeatedly pull out the smallest letter whose
// occurrence commutes with everything before it.
inline Word canonical_fc_word(const Word& w, const CoxeterSpec& spec) {
  Word rest = w, out;
  out.reserve(w.size());
  while (!rest.empty()) {
    size_t best = rest.size();
    for (size_t i = 0; i < rest.size(); ++i) {
      bool movable = true;
      for (size_t j = 0; j < i; ++j)
        if (!commute(spec, rest[j], rest[i])) { movable = false; break; }
      if (movable && (best == rest.size() || rest[i] < rest[best])) best = i;
    }
    out.push_back(rest[best]);
    rest.erase(rest.begin() + best);
  }
  return out;
}

namespace detail {

// Letters that can end some expression in the commutation class: positions
// with no non-commuting letter after them.
inline std::set<int> removable_suffix_letters(const Word& w, const CoxeterSpec& spec) {
  std::set<int> out;
  for (size_t i = 0; i < w.size(); ++i) {
    bool maximal = true;
    for (size_t j = i + 1; j < w.size(); ++j)
      if (!commute(spec, w[i], w[j])) { maximal = false; break; }
    if (maximal) out.insert(w[i]);
  }
  return out;
}

// FC test for a word already known to be reduced: search the commutation
// class for a long braid factor.
inline bool reduced_word_is_fc(const Word& w, const CoxeterSpec& spec) {
  return !explore_commutation_class(
      w, spec, [&](const Word& v) { return has_braid_factor(v, spec); });
}

}  // namespace detail

// One canonical reduced word per FC element of length <= max_len, grouped by
// length (result[l] = canonical words of length l, sorted).  `frontier_cap`
// guards the total number of elements held at any level.
inline std::vector<std::vector<Word>> enumerate_fc(const CoxeterSpec& spec,
                                                   int max_len,
                                                   size_t frontier_cap = 5000000) {
  if (max_len < 0) throw InvalidInputError("enumerate_fc: max_len must be >= 0");
  std::vector<std::vector<Word>> out(max_len + 1);
  out[0] = {Word{}};
  std::vector<Word> level = {Word{}};
  for (int len = 1; len <= max_len; ++len) {
    std::set<Word> next;
    for (const Word& w : level) {
      std::set<int> blocked = detail::removable_suffix_letters(w, spec);
      for (int g = 0; g <= spec.max_generator(); ++g) {
        if (blocked.count(g)) continue;  // ws not reduced
        Word ws = w;
        ws.push_back(g);
        if (!detail::reduced_word_is_fc(ws, spec)) continue;
        next.insert(canonical_fc_word(ws, spec));
        if (next.size() > frontier_cap)
          throw ResourceLimitError("enumerate_fc frontier exceeded cap");
      }
    }
    level.assign(next.begin(), next.end());
    out[len] = level;
  }
  return out;
}

}  // namespace tldiag
