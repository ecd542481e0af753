#include "pgate/model/params.hpp"

#include "pgate/util/random.hpp"
#include "pgate/util/text.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <map>

namespace pgate::model {
namespace {

diff::Tensor glorot(std::size_t rows, std::size_t cols, util::Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    diff::Tensor t(diff::Shape{rows, cols});
    for (auto& v : t.data()) v = rng.uniform(-a, a);
    return t;
}

diff::Tensor glorot_vector(std::size_t n, std::size_t fan_in, std::size_t fan_out, util::Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    diff::Tensor t(diff::Shape{n});
    for (auto& v : t.data()) v = rng.uniform(-a, a);
    return t;
}

void write_le_doubles(const std::filesystem::path& path, const diff::Tensor& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (double v : t.data()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        out.write(bytes, 8);
    }
}

diff::Tensor read_le_doubles(const std::filesystem::path& path, diff::Shape shape) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing checkpoint array " + path.string());
    diff::Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("truncated checkpoint array " + path.string());
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        v = std::bit_cast<double>(bits);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("oversized checkpoint array " + path.string());
    return t;
}

} // namespace

void ParameterStore::add(std::string name, diff::Tensor value) {
    if (index_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    index_.emplace(name, tensors_.size());
    names_.push_back(std::move(name));
    tensors_.push_back(std::move(value));
}

bool ParameterStore::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ParameterStore::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
    return it->second;
}

const diff::Tensor& ParameterStore::get(std::string_view name) const { return tensors_[index_of(name)]; }

diff::Tensor& ParameterStore::get(std::string_view name) {
    return const_cast<diff::Tensor&>(std::as_const(*this).get(name));
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
}

bool ParameterStore::identical(const ParameterStore& other) const {
    if (names_ != other.names_) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        if (!tensors_[i].identical(other.tensors_[i])) return false;
    }
    return true;
}

std::string layer_param(std::string_view stem, std::size_t k) { return std::string(stem) + "." + std::to_string(k); }

ParameterStore init_params(const ModelConfig& config, const graph::Graph& graph,
                           const graph::StructuralFeatures& features, std::uint64_t seed) {
    config.validate();
    const std::size_t n = graph.node_count();
    if (features.node_count() != n) {
        throw std::invalid_argument("init_params: structural features cover " + std::to_string(features.node_count()) +
                                    " nodes, graph has " + std::to_string(n));
    }
    if (config.input_dim_c() != config.embed_dim + graph::kStructuralColumns + (config.has_membership_slot() ? 1 : 0)) {
        throw std::invalid_argument("init_params: layer-0 input width does not match the embedding layout");
    }

    util::Rng rng(seed);
    ParameterStore store;

    diff::Tensor embed_c(diff::Shape{n, config.embed_dim});
    for (auto& v : embed_c.data()) v = rng.normal(0.0, 0.1);
    store.add("embed_c", std::move(embed_c));
    diff::Tensor embed_p(diff::Shape{n, config.dim_p_at(0)});
    for (auto& v : embed_p.data()) v = rng.normal(0.0, 0.1);
    store.add("embed_p", std::move(embed_p));

    for (std::size_t k = 0; k < config.layers; ++k) {
        const auto dc_in = config.dim_c_at(k), dc_out = config.dim_c_at(k + 1);
        const auto dp_in = config.dim_p_at(k), dp_out = config.dim_p_at(k + 1);
        store.add(layer_param("W_C", k), glorot(dc_out, dc_in, rng));
        store.add(layer_param("W_P", k), glorot(dp_out, dp_in, rng));
        if (config.gated) {
            store.add(layer_param("W_CG", k), glorot(dc_out, dc_in, rng));
            store.add(layer_param("beta_CG", k), diff::Tensor(diff::Shape{2 * dc_out}, 0.0));
            store.add(layer_param("W_PG", k), glorot(dp_out, dp_in, rng));
            store.add(layer_param("beta_PG", k), diff::Tensor(diff::Shape{2 * dp_out}, 0.0));
        }
        if (config.base == BaseModel::Gat) {
            store.add(layer_param("att_C", k), glorot_vector(2 * dc_out, 2 * dc_out, 1, rng));
            store.add(layer_param("att_P", k), glorot_vector(2 * dp_out, 2 * dp_out, 1, rng));
        }
        if (config.base == BaseModel::StateGnn) {
            store.add(layer_param("w_S", k), glorot(1, dc_in, rng));
        }
    }
    if (config.base != BaseModel::StateGnn) {
        store.add("W_CP", glorot(1, config.dim_c_at(config.layers), rng));
    }
    store.add("W_PP", glorot(kTraitWidth, config.dim_p_at(config.layers), rng));
    return store;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
    if (!manifest) throw std::runtime_error("cannot write checkpoint manifest in " + dir.string());
    const auto& c = ck.config;
    manifest << "format=pgate-checkpoint-1\n"
             << "model.base=" << to_string(c.base) << '\n'
             << "model.gated=" << (c.gated ? "true" : "false") << '\n'
             << "model.layers=" << c.layers << '\n'
             << "model.dim_c=" << c.dim_c << '\n'
             << "model.dim_p=" << c.dim_p << '\n'
             << "model.embed_dim=" << c.embed_dim << '\n'
             << "model.squash=" << to_string(c.squash) << '\n'
             << "model.activation=" << to_string(c.activation) << '\n'
             << "seed=" << ck.seed << '\n'
             << "nodes=" << ck.node_count << '\n';
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        const auto& name = ck.params.names()[i];
        const auto& t = ck.params.tensors()[i];
        manifest << "param=" << name;
        for (auto d : t.shape()) manifest << ' ' << d;
        manifest << '\n';
        write_le_doubles(dir / (name + ".bin"), t);
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw std::runtime_error("missing checkpoint manifest in " + dir.string());
    Checkpoint ck;
    std::string line;
    bool tagged = false;
    while (std::getline(manifest, line)) {
        const auto text = util::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw std::runtime_error("checkpoint manifest: malformed line '" + line + "'");
        const auto key = text.substr(0, eq), value = text.substr(eq + 1);
        if (key == "format") tagged = value == "pgate-checkpoint-1";
        else if (key == "model.base") ck.config.base = parse_base_model(value);
        else if (key == "model.gated") ck.config.gated = value == "true";
        else if (key == "model.layers") ck.config.layers = static_cast<std::size_t>(util::parse_int(value));
        else if (key == "model.dim_c") ck.config.dim_c = static_cast<std::size_t>(util::parse_int(value));
        else if (key == "model.dim_p") ck.config.dim_p = static_cast<std::size_t>(util::parse_int(value));
        else if (key == "model.embed_dim") ck.config.embed_dim = static_cast<std::size_t>(util::parse_int(value));
        else if (key == "model.squash") ck.config.squash = parse_gate_squash(value);
        else if (key == "model.activation") ck.config.activation = parse_activation(value);
        else if (key == "seed") ck.seed = static_cast<std::uint64_t>(std::stoull(std::string(value)));
        else if (key == "nodes") ck.node_count = static_cast<std::size_t>(util::parse_int(value));
        else if (key == "param") {
            const auto fields = util::split_whitespace(value);
            if (fields.empty()) throw std::runtime_error("checkpoint manifest: empty param entry");
            diff::Shape shape;
            for (std::size_t i = 1; i < fields.size(); ++i) shape.push_back(static_cast<std::size_t>(util::parse_int(fields[i])));
            std::string name(fields[0]);
            ck.params.add(name, read_le_doubles(dir / (name + ".bin"), std::move(shape)));
        } else {
            throw std::runtime_error("checkpoint manifest: unknown key '" + std::string(key) + "'");
        }
    }
    if (!tagged) throw std::runtime_error("checkpoint manifest: missing or unsupported format tag");
    ck.config.validate();
    return ck;
}

} // namespace pgate::model
