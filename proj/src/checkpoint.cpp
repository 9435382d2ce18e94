#include <fstream>
#include <sstream>

#include "dqnlab/errors.hpp"
#include "dqnlab/nn.hpp"
#include "json.hpp"

namespace dqnlab::nn {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError(std::string("checkpoint: missing field \"") + key + "\"");
    return obj.at(key);
}

std::size_t require_count(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_number_unsigned()) throw ParseError(std::string("checkpoint: \"") + key + "\" must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> require_numbers(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_array()) throw ParseError(std::string("checkpoint: \"") + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& x : v) {
        if (!x.is_number()) throw ParseError(std::string("checkpoint: \"") + key + "\" holds a non-number");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

std::string save_network(const QNetwork& net) {
    json doc;
    doc["version"] = kCheckpointVersion;
    doc["dropout_p"] = net.dropout_p();
    json layers = json::array();
    for (const DenseLayer& l : net.layers())
        layers.push_back({{"fan_in", l.fan_in}, {"fan_out", l.fan_out}, {"w", l.weights}, {"b", l.bias}});
    doc["layers"] = std::move(layers);
    return doc.dump();
}

QNetwork load_network(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    const json& version = require(doc, "version");
    if (!version.is_number_integer() || version.get<long long>() != kCheckpointVersion)
        throw VersionError("checkpoint: unsupported version " + version.dump() + ", expected " +
                           std::to_string(kCheckpointVersion));
    const json& p = require(doc, "dropout_p");
    if (!p.is_number()) throw ParseError("checkpoint: \"dropout_p\" must be a number");
    const json& layers = require(doc, "layers");
    if (!layers.is_array()) throw ParseError("checkpoint: \"layers\" must be an array");
    if (layers.size() != kLayerCount)
        throw DimensionError("checkpoint: expected " + std::to_string(kLayerCount) + " layers, found " +
                             std::to_string(layers.size()));

    LayerStack stack;
    for (std::size_t i = 0; i < kLayerCount; ++i) {
        DenseLayer& l = stack[i];
        l.fan_in = require_count(layers[i], "fan_in");
        l.fan_out = require_count(layers[i], "fan_out");
        l.weights = require_numbers(layers[i], "w");
        l.bias = require_numbers(layers[i], "b");
        if (l.fan_in == 0 || l.fan_out == 0 || l.weights.size() != l.fan_in * l.fan_out ||
            l.bias.size() != l.fan_out)
            throw DimensionError("checkpoint: layer " + std::to_string(i) + " declares " +
                                 std::to_string(l.fan_out) + "x" + std::to_string(l.fan_in) +
                                 " but carries " + std::to_string(l.weights.size()) + " weights and " +
                                 std::to_string(l.bias.size()) + " biases");
        if (i > 0 && l.fan_in != stack[i - 1].fan_out)
            throw DimensionError("checkpoint: layer " + std::to_string(i) + " fan_in " +
                                 std::to_string(l.fan_in) + " does not chain with fan_out " +
                                 std::to_string(stack[i - 1].fan_out));
    }
    const double dropout = p.get<double>();
    if (!(dropout >= 0.0 && dropout <= 1.0)) throw ParseError("checkpoint: dropout_p outside [0, 1]");
    return QNetwork(std::move(stack), dropout);
}

void save_network_file(const QNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << save_network(net) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

QNetwork load_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_network(buf.str());
}

}  // namespace dqnlab::nn
