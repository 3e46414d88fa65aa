#include <fstream>
#include <sstream>
#include <string>

#include "ecgsec/error.hpp"
#include "ecgsec/inference.hpp"
#include "json.hpp"

namespace ecgsec {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "ecgsec-cnn-weights";
constexpr int kFormatVersion = 1;

struct TensorSpec {
  const char* name;
  std::vector<std::size_t> shape;
};

std::vector<TensorSpec> tensor_specs(const ModelShape& s) {
  return {
      {"conv_filters", {s.filters, s.kernel, 1}},
      {"conv_bias", {s.filters}},
      {"dense1_w", {s.hidden, s.flat_len()}},
      {"dense1_b", {s.hidden}},
      {"out_w", {kNumClasses, s.hidden}},
      {"out_b", {kNumClasses}},
  };
}

template <typename W>
auto& tensor_ref(W& w, std::string_view name) {
  if (name == "conv_filters") return w.conv_filters;
  if (name == "conv_bias") return w.conv_bias;
  if (name == "dense1_w") return w.dense1_w;
  if (name == "dense1_b") return w.dense1_b;
  if (name == "out_w") return w.out_w;
  return w.out_b;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t read_dim(const json& arch, const char* key) {
  if (!arch.contains(key) || !arch.at(key).is_number_unsigned()) {
    throw ParseError(std::string("architecture.") + key + " missing or not an unsigned integer");
  }
  return arch.at(key).get<std::size_t>();
}

}  // namespace

std::string weights_to_json(const ModelWeights& weights) {
  weights.validate();
  const auto& s = weights.shape;
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kFormatVersion;
  doc["architecture"] = {{"input_len", s.input_len}, {"filters", s.filters},
                         {"kernel", s.kernel},       {"hidden", s.hidden},
                         {"classes", kNumClasses}};
  json tensors = json::object();
  for (const auto& spec : tensor_specs(s)) {
    tensors[spec.name] = {{"shape", spec.shape}, {"values", tensor_ref(weights, spec.name)}};
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

ModelWeights weights_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("weights file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormat) {
    throw ParseError("not an ecgsec weights document");
  }
  if (doc.value("version", 0) != kFormatVersion) {
    throw ParseError("unsupported weights format version");
  }
  if (!doc.contains("architecture") || !doc["architecture"].is_object()) {
    throw ParseError("missing architecture block");
  }
  const auto& arch = doc["architecture"];
  ModelShape shape{read_dim(arch, "input_len"), read_dim(arch, "filters"),
                   read_dim(arch, "kernel"), read_dim(arch, "hidden")};
  if (read_dim(arch, "classes") != kNumClasses) {
    throw ShapeMismatch("architecture", "classes must be 5");
  }
  shape.validate();

  if (!doc.contains("tensors") || !doc["tensors"].is_object()) {
    throw ParseError("missing tensors block");
  }
  const auto& tensors = doc["tensors"];
  ModelWeights w;
  w.shape = shape;
  for (const auto& spec : tensor_specs(shape)) {
    if (!tensors.contains(spec.name)) throw ShapeMismatch(spec.name, "tensor missing");
    const auto& t = tensors.at(spec.name);
    std::vector<std::size_t> declared;
    try {
      declared = t.at("shape").get<std::vector<std::size_t>>();
    } catch (const json::exception&) {
      throw ShapeMismatch(spec.name, "shape field missing or malformed");
    }
    if (declared != spec.shape) {
      throw ShapeMismatch(spec.name, "declared " + shape_str(declared) + ", architecture needs " +
                                         shape_str(spec.shape));
    }
    if (!t.contains("values") || !t.at("values").is_array()) {
      throw ShapeMismatch(spec.name, "values array missing");
    }
    const auto& values = t.at("values");
    std::size_t expected = 1;
    for (auto d : spec.shape) expected *= d;
    if (values.size() != expected) {
      throw ShapeMismatch(spec.name, "expected " + std::to_string(expected) + " values, got " +
                                         std::to_string(values.size()));
    }
    auto& dst = tensor_ref(w, spec.name);
    dst.reserve(expected);
    for (const auto& v : values) {
      if (!v.is_number()) {
        throw DomainError(std::string("non-finite or non-numeric value in ") + spec.name);
      }
      dst.push_back(v.get<double>());
    }
  }
  w.validate();
  return w;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  const std::string text = weights_to_json(weights);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move weights into place at " + path.string() + ": " + ec.message());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileNotFound(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return weights_from_json(ss.str());
}

}  // namespace ecgsec
