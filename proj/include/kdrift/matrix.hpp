#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kdrift/errors.hpp"

namespace kdrift {

// Dense row-major matrix of feature frames. Rows are observations,
// columns are feature dimensions.
class FrameMatrix {
public:
    FrameMatrix() = default;

    FrameMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static FrameMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        FrameMatrix m;
        for (const auto& r : rows) m.append_row(r);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    void append_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) {
            cols_ = r.size();
        } else if (r.size() != cols_) {
            throw RejectedInput("frame row has dimension " + std::to_string(r.size()) +
                                ", expected " + std::to_string(cols_));
        }
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    void append_rows(const FrameMatrix& other) {
        for (std::size_t i = 0; i < other.rows(); ++i) append_row(other.row(i));
    }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const FrameMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace kdrift
