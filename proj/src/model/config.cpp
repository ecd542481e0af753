#include "pgate/model/config.hpp"

namespace pgate::model {

std::string_view to_string(BaseModel base) {
    switch (base) {
    case BaseModel::Gcn: return "gcn";
    case BaseModel::Gat: return "gat";
    case BaseModel::StateGnn: return "stategnn";
    }
    return "gcn";
}

std::string_view to_string(GateSquash squash) {
    switch (squash) {
    case GateSquash::Raw: return "raw";
    case GateSquash::Sigmoid: return "sigmoid";
    case GateSquash::Softmax: return "softmax";
    }
    return "sigmoid";
}

std::string_view to_string(Activation act) { return act == Activation::Relu ? "relu" : "tanh"; }

BaseModel parse_base_model(std::string_view text) {
    if (text == "gcn") return BaseModel::Gcn;
    if (text == "gat") return BaseModel::Gat;
    if (text == "stategnn") return BaseModel::StateGnn;
    throw std::invalid_argument("unknown base model '" + std::string(text) + "' (gcn | gat | stategnn)");
}

GateSquash parse_gate_squash(std::string_view text) {
    if (text == "raw") return GateSquash::Raw;
    if (text == "sigmoid") return GateSquash::Sigmoid;
    if (text == "softmax") return GateSquash::Softmax;
    throw std::invalid_argument("unknown gate squash '" + std::string(text) + "' (raw | sigmoid | softmax)");
}

Activation parse_activation(std::string_view text) {
    if (text == "relu") return Activation::Relu;
    if (text == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + std::string(text) + "' (relu | tanh)");
}

void ModelConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("model: layer count K must be >= 1");
    if (dim_c < 1 || dim_p < 1 || embed_dim < 1) throw std::invalid_argument("model: dimensions must be >= 1");
}

} // namespace pgate::model
