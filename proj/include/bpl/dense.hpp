#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace bpl {

using Matrix = Eigen::MatrixXd;  // column-major
using Vector = Eigen::VectorXd;

// Dense tensor in generalized column-major order: the first index varies
// fastest, i.e. element (i_0,...,i_{N-1}) lives at i_0 + d_0*(i_1 + d_1*(...)).
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<int> dims);
    DenseTensor(std::vector<int> dims, Vector data);

    int order() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    std::int64_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    Vector& vec() { return data_; }
    const Vector& vec() const { return data_; }

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;

    double norm() const { return data_.norm(); }
    double dot(const DenseTensor& other) const;

    void set_zero() { data_.setZero(); }
    bool same_dims(const DenseTensor& other) const { return dims_ == other.dims_; }

private:
    std::vector<int> dims_;
    Vector data_;
};

// T x_mode A : contracts T's `mode` index (length A.cols()) against A's
// columns; the output replaces dims[mode] with A.rows().
DenseTensor mode_product(const DenseTensor& T, const Matrix& A, int mode);

// Mode-`mode` unfolding: dims[mode] rows, remaining indices flattened in
// original order (first-fastest) as columns.
Matrix unfold(const DenseTensor& T, int mode);

// Sum over all indices except `mode` of outer products of mode-fibers:
// result(a, b) = sum over shared indices of T1(..., a, ...) * T2(..., b, ...).
// T1 and T2 must agree on every dimension except `mode`.
Matrix contract_all_but(const DenseTensor& T1, const DenseTensor& T2, int mode);

// --- plain text formats ---
// Matrix file: optional leading '#' comment lines, then "rows cols", then
// row-major whitespace-separated values.
// Tensor file: same, with "N d_1 ... d_N" and values in generalized
// column-major order.
void write_matrix(const std::string& path, const Matrix& M, const std::string& comment = "");
Matrix read_matrix(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& T, const std::string& comment = "");
DenseTensor read_tensor(const std::string& path);

// Full round-trip float formatting ("%.17g") shared by all CSV writers.
std::string format_double(double v);

}  // namespace bpl
