#ifndef DML_DATASET_HPP
#define DML_DATASET_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dml {

/// One observation w = (d, v, x). `v` is meaningful only when the owning
/// dataset carries a localization column; it is 0 otherwise.
struct Point {
    double d = 0.0;
    double v = 0.0;
    std::span<const double> x;
};

/// Immutable sample of rows (y, d, v, x). The localization covariate v is
/// optional; x may be empty.
class Dataset {
public:
    Dataset(std::vector<double> y, std::vector<double> d, std::vector<double> v,
            std::vector<double> x_flat, std::size_t x_dim);

    std::size_t size() const { return y_.size(); }
    std::size_t x_dim() const { return p_; }
    bool has_v() const { return !v_.empty(); }

    double y(std::size_t i) const { return y_[i]; }
    double d(std::size_t i) const { return d_[i]; }
    double v(std::size_t i) const { return has_v() ? v_[i] : 0.0; }
    std::span<const double> x(std::size_t i) const {
        return {x_.data() + i * p_, p_};
    }
    Point point(std::size_t i) const { return {d_[i], v(i), x(i)}; }

    std::span<const double> y_column() const { return y_; }
    std::span<const double> d_column() const { return d_; }
    std::span<const double> v_column() const { return v_; }

    /// Rows gathered by index, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Rows gathered by index, then sorted lexicographically by
    /// (d, v, x, y). The result depends only on the multiset of selected
    /// rows, which makes downstream fits invariant to row permutations.
    Dataset subset_canonical(std::span<const std::size_t> rows) const;

private:
    std::vector<double> y_, d_, v_, x_;
    std::size_t p_;
};

/// Column-role declaration for CSV ingestion. An empty `v` means the dataset
/// has no localization covariate.
struct ColumnRoles {
    std::string y;
    std::string d;
    std::string v;
    std::vector<std::string> x;
};

/// Reads a CSV file with a header row. Every declared role column must exist
/// and parse as a finite number in every row; violations raise IngestError
/// naming the line and column.
Dataset read_csv(const std::string& path, const ColumnRoles& roles);

/// Writes the dataset with header y,d[,v],x1..xp.
void write_csv(const std::string& path, const Dataset& data);

} // namespace dml

#endif
