#include "gpa/embedding.hpp"

#include <cctype>
#include <cmath>

#include "gpa/errors.hpp"
#include "gpa/hash.hpp"

namespace gpa {

HashedTfEmbedder::HashedTfEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) {
        throw Error(ErrorCode::BadConfig, "embedder dimension must be positive");
    }
}

std::vector<double> HashedTfEmbedder::embed(const std::string& text) const {
    std::vector<double> vec(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            vec[fnv1a64(token) % dimension_] += 1.0;
            token.clear();
        }
    };
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();

    double norm = 0;
    for (double v : vec) norm += v * v;
    if (norm > 0) {
        norm = std::sqrt(norm);
        for (double& v : vec) v /= norm;
    }
    return vec;
}

std::unique_ptr<Embedder> make_embedder(const std::string& name, std::size_t dimension) {
    if (name == "hashed-tf" || name.empty()) {
        return std::make_unique<HashedTfEmbedder>(dimension == 0 ? 256 : dimension);
    }
    throw Error(ErrorCode::BadConfig, "unknown embedder '" + name + "'");
}

}  // namespace gpa
