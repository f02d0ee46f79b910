#pragma once

#include <memory>
#include <string>
#include <vector>

namespace gpa {

// Text -> fixed-dimension vector. The SCI computation only assumes this
// contract; swap in a real embedding service behind it when one exists.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
};

// Deterministic hashed term-frequency embedding: lowercase alphanumeric
// tokens, FNV-hashed into a fixed number of buckets, L2-normalized.
// Identical texts embed identically on every platform, which keeps SCI
// reproducible offline.
class HashedTfEmbedder : public Embedder {
public:
    explicit HashedTfEmbedder(std::size_t dimension = 256);

    std::vector<double> embed(const std::string& text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "hashed-tf"; }

private:
    std::size_t dimension_;
};

std::unique_ptr<Embedder> make_embedder(const std::string& name, std::size_t dimension);

}  // namespace gpa
