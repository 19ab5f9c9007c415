#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styloscope/random.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return STYLOSCOPE_TEST_DATA; }
inline std::filesystem::path source_dir() { return STYLOSCOPE_SOURCE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, styloscope::Random& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

/// Blobs centred at distinct corners; rows grouped by class.
struct Blobs {
    Eigen::MatrixXd x;
    std::vector<std::string> labels;
};

inline Blobs blobs(std::size_t per_class, Eigen::Index dims, double separation, double spread,
                   styloscope::Random& rng, std::size_t classes = 3) {
    Blobs b;
    b.x.resize(static_cast<Eigen::Index>(per_class * classes), dims);
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        Eigen::RowVectorXd centre = Eigen::RowVectorXd::Zero(dims);
        centre(static_cast<Eigen::Index>(c % static_cast<std::size_t>(dims))) = separation;
        for (std::size_t i = 0; i < per_class; ++i, ++r) {
            for (Eigen::Index d = 0; d < dims; ++d) b.x(r, d) = centre(d) + spread * rng.normal();
            b.labels.push_back("c" + std::to_string(c));
        }
    }
    return b;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("styloscope_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing_support
