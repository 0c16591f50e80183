#ifndef DML_FOLDS_HPP
#define DML_FOLDS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dml {

/// Disjoint cover of rows 0..n-1 by L folds whose sizes differ by at most 1.
struct FoldPartition {
    std::size_t fold_count = 0;
    std::vector<std::size_t> assignment;           // row -> fold in [0, fold_count)
    std::vector<std::vector<std::size_t>> members; // fold -> ascending row indices

    std::size_t size() const { return assignment.size(); }

    /// Ascending row indices of every fold except `fold`.
    std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Shuffles rows with a seeded Fisher-Yates pass, then cuts contiguous
/// blocks; the remainder rows go to the last folds. Deterministic in
/// (n, L, seed).
FoldPartition partition_folds(std::size_t n, std::size_t L, std::uint64_t seed);

} // namespace dml

#endif
