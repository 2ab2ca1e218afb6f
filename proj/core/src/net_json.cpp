#include "padlab/net_json.hpp"

#include <fstream>

#include <json.hpp>

#include "padlab/hash.hpp"

namespace padlab {

namespace {

using nlohmann::json;

json padding_to_json(const PaddingMode& mode) {
  const char* name = nullptr;
  switch (mode.kind) {
    case PaddingKind::None: name = "none"; break;
    case PaddingKind::Zero: name = "zero"; break;
    case PaddingKind::Reflect: name = "reflect"; break;
    case PaddingKind::Circular: name = "circular"; break;
  }
  return json{{"mode", name}, {"pad", mode.pad}};
}

PaddingMode padding_from_json(const json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  const int pad = j.at("pad").get<int>();
  if (mode == "none") {
    if (pad != 0) throw ConfigError("padding mode none carries pad 0");
    return PaddingMode::none();
  }
  if (mode == "zero") return PaddingMode::zero(pad);
  if (mode == "reflect") return PaddingMode::reflect(pad);
  if (mode == "circular") return PaddingMode::circular(pad);
  throw ConfigError("unknown padding mode '" + mode + "'");
}

json stage_to_json(const Stage& stage) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConvLayer>) {
          return json{{"type", "conv"},
                      {"out_channels", s.out_channels},
                      {"in_channels", s.in_channels},
                      {"kh", s.kh},
                      {"kw", s.kw},
                      {"weights", s.weights},
                      {"bias", s.bias},
                      {"padding", padding_to_json(s.padding)}};
        } else if constexpr (std::is_same_v<T, Activation>) {
          if (s.kind == ActKind::Identity) {
            return json{{"type", "identity"}};
          }
          return json{{"type", "leaky_relu"}, {"gamma", s.gamma}};
        } else {
          return json{{"type", "upsample"},
                      {"height", s.target.height},
                      {"width", s.target.width}};
        }
      },
      stage);
}

Stage stage_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv") {
    ConvLayer layer;
    layer.out_channels = j.at("out_channels").get<int>();
    layer.in_channels = j.at("in_channels").get<int>();
    layer.kh = j.at("kh").get<int>();
    layer.kw = j.at("kw").get<int>();
    layer.weights = j.at("weights").get<std::vector<double>>();
    layer.bias = j.at("bias").get<std::vector<double>>();
    layer.padding = padding_from_json(j.at("padding"));
    layer.validate();
    return layer;
  }
  if (type == "identity") return Activation::identity();
  if (type == "leaky_relu") {
    return Activation::leaky_relu(j.at("gamma").get<double>());
  }
  if (type == "upsample") {
    const GridSize target{j.at("height").get<int>(), j.at("width").get<int>()};
    validate_grid(target);
    return Upsample{target};
  }
  throw ConfigError("unknown stage type '" + type + "'");
}

}  // namespace

std::string network_to_json(const NetworkSpec& net) {
  json doc;
  doc["format"] = "padlab-network";
  doc["version"] = 1;
  doc["stages"] = json::array();
  for (const Stage& stage : net.stages) {
    doc["stages"].push_back(stage_to_json(stage));
  }
  return doc.dump(2);
}

NetworkSpec network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network JSON parse error: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "padlab-network") {
      throw ConfigError("not a padlab-network document");
    }
    if (doc.at("version").get<int>() != 1) {
      throw ConfigError("unsupported network schema version");
    }
    NetworkSpec net;
    for (const json& stage : doc.at("stages")) {
      net.stages.push_back(stage_from_json(stage));
    }
    return net;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network JSON field error: ") + e.what());
  }
}

void save_network(const NetworkSpec& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot open '" + path.string() + "' for writing");
  }
  out << network_to_json(net) << '\n';
}

NetworkSpec load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open network file '" + path.string() + "'");
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return network_from_json(text);
}

std::string network_hash(const NetworkSpec& net) {
  return fnv1a64_hex(network_to_json(net));
}

}  // namespace padlab
