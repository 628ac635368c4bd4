#pragma once

#include "pdmd/types.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testutil {

using pdmd::Complex;
using pdmd::Matrix;
using pdmd::RealMatrix;
using pdmd::Vector;

template <typename A, typename B>
double rel_error(const A& approx, const B& exact) {
    const double denom = exact.norm();
    return denom == 0.0 ? approx.norm() : (approx - exact).norm() / denom;
}

inline Matrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = n(rng);
            const double im = n(rng);
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

inline RealMatrix random_real(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    RealMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
    }
    return m;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "pdmd") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil

