#include <algorithm>
#include <numeric>
#include <random>

#include "pbd/data/scaler.hpp"
#include "pbd/error.hpp"

namespace pbd::data {

FoldSplit kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > n) throw DomainError("kfold: need 1 <= k <= n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  FoldSplit split{k, std::vector<std::size_t>(n)};
  for (std::size_t j = 0; j < n; ++j) split.assignments[perm[j]] = j % k;
  return split;
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
  if (fold >= k) throw DomainError("fold index out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
  if (fold >= k) throw DomainError("fold index out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

}  // namespace pbd::data
