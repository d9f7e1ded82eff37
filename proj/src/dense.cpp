#include "bpl/dense.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bpl/errors.hpp"

namespace bpl {

namespace {

std::int64_t product(const std::vector<int>& dims) {
    std::int64_t n = 1;
    for (int d : dims) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

// left = product of dims before `mode`, right = product after
void split_at_mode(const std::vector<int>& dims, int mode, std::int64_t& left, std::int64_t& right) {
    if (mode < 0 || mode >= static_cast<int>(dims.size()))
        throw std::invalid_argument("mode out of range");
    left = 1;
    right = 1;
    for (int m = 0; m < mode; ++m) left *= dims[m];
    for (int m = mode + 1; m < static_cast<int>(dims.size()); ++m) right *= dims[m];
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> dims) : dims_(std::move(dims)) {
    data_ = Vector::Zero(product(dims_));
}

DenseTensor::DenseTensor(std::vector<int> dims, Vector data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != product(dims_))
        throw std::invalid_argument("tensor data length does not match dimensions");
}

namespace {
std::int64_t flat_offset(const std::vector<int>& dims, const std::vector<int>& idx) {
    if (idx.size() != dims.size()) throw std::invalid_argument("index order mismatch");
    std::int64_t offset = 0;
    std::int64_t stride = 1;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        if (idx[m] < 0 || idx[m] >= dims[m]) throw std::out_of_range("tensor index out of range");
        offset += stride * idx[m];
        stride *= dims[m];
    }
    return offset;
}
}  // namespace

double& DenseTensor::at(const std::vector<int>& idx) { return data_[flat_offset(dims_, idx)]; }

double DenseTensor::at(const std::vector<int>& idx) const { return data_[flat_offset(dims_, idx)]; }

double DenseTensor::dot(const DenseTensor& other) const {
    if (!same_dims(other)) throw std::invalid_argument("tensor dot: dimension mismatch");
    return data_.dot(other.data_);
}

DenseTensor mode_product(const DenseTensor& T, const Matrix& A, int mode) {
    const auto& dims = T.dims();
    std::int64_t left, right;
    split_at_mode(dims, mode, left, right);
    const int d = dims[mode];
    if (A.cols() != d) throw std::invalid_argument("mode_product: A.cols() != dims[mode]");
    const int d_out = static_cast<int>(A.rows());

    std::vector<int> out_dims = dims;
    out_dims[mode] = d_out;
    DenseTensor out(out_dims);

    // view both tensors as `right` slabs of (left x d) / (left x d_out)
    for (std::int64_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> in(T.data() + r * left * d, left, d);
        Eigen::Map<Matrix> slab(out.data() + r * left * d_out, left, d_out);
        slab.noalias() = in * A.transpose();
    }
    return out;
}

Matrix unfold(const DenseTensor& T, int mode) {
    const auto& dims = T.dims();
    std::int64_t left, right;
    split_at_mode(dims, mode, left, right);
    const int d = dims[mode];
    Matrix out(d, left * right);
    for (std::int64_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> in(T.data() + r * left * d, left, d);
        out.middleCols(r * left, left) = in.transpose();
    }
    return out;
}

Matrix contract_all_but(const DenseTensor& T1, const DenseTensor& T2, int mode) {
    const auto& d1 = T1.dims();
    const auto& d2 = T2.dims();
    if (d1.size() != d2.size()) throw std::invalid_argument("contract_all_but: order mismatch");
    for (std::size_t m = 0; m < d1.size(); ++m)
        if (static_cast<int>(m) != mode && d1[m] != d2[m])
            throw std::invalid_argument("contract_all_but: dimension mismatch off mode");

    std::int64_t left, right;
    split_at_mode(d1, mode, left, right);
    const int a = d1[mode];
    const int b = d2[mode];
    Matrix out = Matrix::Zero(a, b);
    for (std::int64_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> s1(T1.data() + r * left * a, left, a);
        Eigen::Map<const Matrix> s2(T2.data() + r * left * b, left, b);
        out.noalias() += s1.transpose() * s2;
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

// skips leading '#' comment lines, returns the stream positioned at data
void skip_comments(std::istream& in) {
    while (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
    }
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& M, const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    out << M.rows() << " " << M.cols() << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << " ";
            out << format_double(M(i, j));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    skip_comments(in);
    Eigen::Index rows, cols;
    if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
        throw IoError("bad matrix header in " + path);
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> M(i, j))) throw IoError("truncated matrix data in " + path);
    if (!M.allFinite()) throw IoError("non-finite matrix entries in " + path);
    return M;
}

void write_tensor(const std::string& path, const DenseTensor& T, const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!comment.empty()) out << "# " << comment << "\n";
    out << T.order();
    for (int d : T.dims()) out << " " << d;
    out << "\n";
    for (std::int64_t i = 0; i < T.size(); ++i) {
        out << format_double(T.data()[i]);
        out << ((i + 1) % 8 == 0 || i + 1 == T.size() ? "\n" : " ");
    }
    if (!out) throw IoError("write failed: " + path);
}

DenseTensor read_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    skip_comments(in);
    int order;
    if (!(in >> order) || order <= 0) throw IoError("bad tensor header in " + path);
    std::vector<int> dims(order);
    for (int& d : dims)
        if (!(in >> d) || d <= 0) throw IoError("bad tensor dims in " + path);
    DenseTensor T(dims);
    for (std::int64_t i = 0; i < T.size(); ++i)
        if (!(in >> T.data()[i])) throw IoError("truncated tensor data in " + path);
    if (!T.vec().allFinite()) throw IoError("non-finite tensor entries in " + path);
    return T;
}

}  // namespace bpl
