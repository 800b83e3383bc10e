#pragma once

// Permutations on {0..n-1} with composition (p*q)(x) = p(q(x)), group
// generation by closure, coset quotients and typed-graph automorphism checks.
// Everything here is exact and small (n <= 8), so brute force is fine.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpg8 {

class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(int n) {
    Permutation p;
    p.map_.resize(n);
    std::iota(p.map_.begin(), p.map_.end(), 0);
    return p;
  }

  explicit Permutation(std::vector<int> images) : map_(std::move(images)) {
    std::vector<bool> seen(map_.size(), false);
    for (int v : map_) {
      if (v < 0 || v >= static_cast<int>(map_.size()) || seen[v])
        throw std::invalid_argument("not a bijection");
      seen[v] = true;
    }
  }

  // Cycle notation with 1-based single-digit labels, e.g. "(1324)(5768)".
  // Fixed points may be omitted.
  static Permutation from_cycles(const std::string& cycles, int n) {
    Permutation p = identity(n);
    std::vector<int> cycle;
    bool open = false;
    for (char c : cycles) {
      if (c == '(') {
        open = true;
        cycle.clear();
      } else if (c == ')') {
        if (!open) throw std::invalid_argument("unbalanced cycle notation");
        for (std::size_t k = 0; k < cycle.size(); ++k)
          p.map_[cycle[k]] = cycle[(k + 1) % cycle.size()];
        open = false;
      } else if (c >= '1' && c <= '9') {
        int v = c - '1';
        if (!open || v >= n) throw std::invalid_argument("bad cycle notation");
        cycle.push_back(v);
      } else if (c != ' ') {
        throw std::invalid_argument("bad cycle notation");
      }
    }
    if (open) throw std::invalid_argument("unbalanced cycle notation");
    return p;
  }

  int size() const { return static_cast<int>(map_.size()); }
  int operator()(int x) const { return map_[x]; }

  // (p*q)(x) = p(q(x)): q acts first.
  Permutation operator*(const Permutation& q) const {
    if (size() != q.size()) throw std::invalid_argument("permutation size mismatch");
    Permutation r;
    r.map_.resize(map_.size());
    for (int x = 0; x < size(); ++x) r.map_[x] = map_[q.map_[x]];
    return r;
  }

  Permutation inverse() const {
    Permutation r;
    r.map_.resize(map_.size());
    for (int x = 0; x < size(); ++x) r.map_[map_[x]] = x;
    return r;
  }

  Permutation pow(int e) const {
    Permutation r = identity(size());
    for (int k = 0; k < e; ++k) r = *this * r;
    return r;
  }

  bool is_identity() const {
    for (int x = 0; x < size(); ++x)
      if (map_[x] != x) return false;
    return true;
  }

  bool operator==(const Permutation& o) const { return map_ == o.map_; }
  bool operator<(const Permutation& o) const { return map_ < o.map_; }

  std::string to_cycles() const {
    std::string out;
    std::vector<bool> done(map_.size(), false);
    for (int start = 0; start < size(); ++start) {
      if (done[start] || map_[start] == start) continue;
      out += '(';
      int x = start;
      while (!done[x]) {
        done[x] = true;
        out += static_cast<char>('1' + x);
        x = map_[x];
      }
      out += ')';
    }
    return out.empty() ? "e" : out;
  }

 private:
  std::vector<int> map_;
};

struct GroupStructure {
  std::vector<Permutation> elements;   // sorted, unique
  std::vector<Permutation> generators;

  int order() const { return static_cast<int>(elements.size()); }
  bool contains(const Permutation& p) const {
    return std::binary_search(elements.begin(), elements.end(), p);
  }
};

// Closure of the generators under composition. Terminates: subgroup of S_n.
inline GroupStructure generate_group(const std::vector<Permutation>& generators) {
  if (generators.empty()) throw std::invalid_argument("no generators");
  const int n = generators.front().size();
  std::set<Permutation> elems;
  std::vector<Permutation> frontier{Permutation::identity(n)};
  elems.insert(frontier.front());
  while (!frontier.empty()) {
    std::vector<Permutation> next;
    for (const auto& e : frontier)
      for (const auto& g : generators) {
        Permutation h = g * e;
        if (elems.insert(h).second) next.push_back(h);
      }
    frontier = std::move(next);
  }
  GroupStructure g;
  g.elements.assign(elems.begin(), elems.end());
  g.generators = generators;
  return g;
}

inline bool is_subgroup(const GroupStructure& sub, const GroupStructure& super) {
  for (const auto& p : sub.elements)
    if (!super.contains(p)) return false;
  return true;
}

struct QuotientResult {
  std::vector<std::vector<Permutation>> cosets;  // left cosets aK, each sorted
  bool cyclic = false;
  // A representative whose coset generates the quotient (identity if trivial).
  Permutation cyclic_generator;
};

// Left cosets of K in H plus a cyclicity decision: the quotient is cyclic iff
// the powers of some single element of H visit every coset.
inline QuotientResult quotient(const GroupStructure& H, const GroupStructure& K) {
  if (!is_subgroup(K, H)) throw std::invalid_argument("K is not a subgroup of H");

  auto coset_of = [&](const Permutation& a) {
    std::vector<Permutation> c;
    c.reserve(K.elements.size());
    for (const auto& k : K.elements) c.push_back(a * k);
    std::sort(c.begin(), c.end());
    return c;
  };

  QuotientResult q;
  std::map<std::vector<Permutation>, int> index;
  for (const auto& a : H.elements) {
    auto c = coset_of(a);
    if (index.emplace(c, static_cast<int>(q.cosets.size())).second) q.cosets.push_back(c);
  }

  const int m = static_cast<int>(q.cosets.size());
  q.cyclic_generator = Permutation::identity(H.elements.front().size());
  for (const auto& a : H.elements) {
    std::set<int> visited;
    Permutation pw = Permutation::identity(a.size());
    for (int e = 0; e < m; ++e) {
      visited.insert(index.at(coset_of(pw)));
      pw = a * pw;
    }
    if (static_cast<int>(visited.size()) == m) {
      q.cyclic = true;
      q.cyclic_generator = a;
      break;
    }
  }
  return q;
}

// One directed coupling edge with its numeric gain. Gains compare by value,
// so two differently-named coupling types are interchangeable when equal.
struct TypedEdge {
  int from = 0, to = 0;
  double gain = 0.0;
};

// perm is a typed automorphism iff it maps every edge onto an existing edge
// of equal gain.
inline bool check_typed_automorphism(const Permutation& perm, const std::vector<TypedEdge>& edges) {
  auto find_gain = [&](int from, int to, double* gain) {
    for (const auto& e : edges)
      if (e.from == from && e.to == to) {
        *gain = e.gain;
        return true;
      }
    return false;
  };
  for (const auto& e : edges) {
    double gain;
    if (!find_gain(perm(e.from), perm(e.to), &gain)) return false;
    if (gain != e.gain) return false;
  }
  return true;
}

}  // namespace cpg8
