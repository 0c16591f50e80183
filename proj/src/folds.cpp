#include "dml/folds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dml/errors.hpp"
#include "dml/rng.hpp"

namespace dml {

std::vector<std::size_t> FoldPartition::complement(std::size_t fold) const {
    std::vector<std::size_t> rows;
    rows.reserve(assignment.size() - members[fold].size());
    for (std::size_t ell = 0; ell < fold_count; ++ell) {
        if (ell == fold) continue;
        rows.insert(rows.end(), members[ell].begin(), members[ell].end());
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

FoldPartition partition_folds(std::size_t n, std::size_t L, std::uint64_t seed) {
    if (L < 2 || n < 2 * L) {
        throw PartitionError("cannot split n=" + std::to_string(n) + " rows into L=" +
                             std::to_string(L) + " folds (need L >= 2 and n >= 2L)");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(perm[i], perm[j]);
    }

    FoldPartition part;
    part.fold_count = L;
    part.assignment.assign(n, 0);
    part.members.assign(L, {});
    const std::size_t base = n / L;
    const std::size_t remainder = n % L;
    std::size_t cursor = 0;
    for (std::size_t ell = 0; ell < L; ++ell) {
        std::size_t size = base + (ell >= L - remainder ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) {
            const std::size_t row = perm[cursor++];
            part.assignment[row] = ell;
            part.members[ell].push_back(row);
        }
        std::sort(part.members[ell].begin(), part.members[ell].end());
    }
    return part;
}

} // namespace dml
