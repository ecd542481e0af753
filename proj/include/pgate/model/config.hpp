#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pgate::model {

enum class BaseModel { Gcn, Gat, StateGnn };
enum class GateSquash { Raw, Sigmoid, Softmax };
enum class Activation { Relu, Tanh };

std::string_view to_string(BaseModel base);
std::string_view to_string(GateSquash squash);
std::string_view to_string(Activation act);
BaseModel parse_base_model(std::string_view text);
GateSquash parse_gate_squash(std::string_view text);
Activation parse_activation(std::string_view text);

inline constexpr std::size_t kStructuralWidth = 6;
inline constexpr std::size_t kTraitWidth = 5;

struct ModelConfig {
    BaseModel base = BaseModel::Gcn;
    bool gated = true;
    std::size_t layers = 3;
    std::size_t dim_c = 38;
    std::size_t dim_p = 38;
    std::size_t embed_dim = 32;
    GateSquash squash = GateSquash::Sigmoid;
    Activation activation = Activation::Relu;

    // gcn/gat carry one extra cascade-membership column at layer 0.
    bool has_membership_slot() const { return base != BaseModel::StateGnn; }
    std::size_t input_dim_c() const { return embed_dim + kStructuralWidth + (has_membership_slot() ? 1 : 0); }
    std::size_t dim_c_at(std::size_t k) const { return k == 0 ? input_dim_c() : dim_c; }
    std::size_t dim_p_at(std::size_t) const { return dim_p; }

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

} // namespace pgate::model
