#pragma once

#include "pgate/diff/tensor.hpp"
#include "pgate/graph/graph.hpp"
#include "pgate/graph/structural.hpp"
#include "pgate/model/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace pgate::model {

/// Named trainable arrays, kept in insertion order so optimizer state and checkpoints
/// line up deterministically.
class ParameterStore {
public:
    void add(std::string name, diff::Tensor value);
    bool contains(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    const diff::Tensor& get(std::string_view name) const;
    diff::Tensor& get(std::string_view name);

    std::size_t size() const { return tensors_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<diff::Tensor>& tensors() const { return tensors_; }
    std::vector<diff::Tensor>& tensors() { return tensors_; }
    std::size_t scalar_count() const;

    // Names, shapes and payload compared bitwise.
    bool identical(const ParameterStore& other) const;

private:
    std::vector<std::string> names_;
    std::vector<diff::Tensor> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Parameter names; `k` is the layer index.
std::string layer_param(std::string_view stem, std::size_t k);

/// Glorot-uniform weights, zero gate vectors, N(0, 0.1) node embeddings.
ParameterStore init_params(const ModelConfig& config, const graph::Graph& graph,
                           const graph::StructuralFeatures& features, std::uint64_t seed);

struct Checkpoint {
    ModelConfig config;
    ParameterStore params;
    std::uint64_t seed = 0;
    std::size_t node_count = 0;
};

/// manifest.txt (config echo, seed, names and shapes) plus one little-endian
/// float64 file per parameter.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

} // namespace pgate::model
