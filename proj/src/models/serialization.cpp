#include "nestner/models/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nestner/models/crf_tagger.hpp"
#include "nestner/models/seq2seq_tagger.hpp"

namespace nestner::models {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json config_to_json(const TaggerConfig& c) {
  const auto& e = c.embedding;
  return {
      {"embedding",
       {{"pretrained_dim", e.pretrained_dim},
        {"trainable_dim", e.trainable_dim},
        {"use_lemmas", e.use_lemmas},
        {"char_dim", e.char_dim},
        {"char_rnn_dim", e.char_rnn_dim},
        {"use_pos_onehot", e.use_pos_onehot},
        {"pos_count", e.pos_count},
        {"contextual_dim", e.contextual_dim}}},
      {"hidden_dim", c.hidden_dim},
      {"decoder_dim", c.decoder_dim},
      {"label_dim", c.label_dim},
      {"max_components", c.max_components},
  };
}

TaggerConfig config_from_json(const json& j) {
  TaggerConfig c;
  const json& e = j.at("embedding");
  c.embedding.pretrained_dim = e.at("pretrained_dim").get<int>();
  c.embedding.trainable_dim = e.at("trainable_dim").get<int>();
  c.embedding.use_lemmas = e.at("use_lemmas").get<bool>();
  c.embedding.char_dim = e.at("char_dim").get<int>();
  c.embedding.char_rnn_dim = e.at("char_rnn_dim").get<int>();
  c.embedding.use_pos_onehot = e.at("use_pos_onehot").get<bool>();
  c.embedding.pos_count = e.at("pos_count").get<int>();
  c.embedding.contextual_dim = e.at("contextual_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.decoder_dim = j.at("decoder_dim").get<int>();
  c.label_dim = j.at("label_dim").get<int>();
  c.max_components = j.at("max_components").get<int>();
  return c;
}

/// Skips the reserved pad/unk entries.
json feature_map_to_json(const corpus::FeatureMap& map) {
  return std::vector<std::string>(map.strings().begin() + 2, map.strings().end());
}

corpus::FeatureMap feature_map_from_json(const json& j) {
  return corpus::FeatureMap::from_strings(j.get<std::vector<std::string>>());
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  return v;
}

json matrix_to_json(const nn::Matrix& m) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(m.size()) * 4);
  std::size_t offset = 0;
  for (nn::Index r = 0; r < m.rows(); ++r)
    for (nn::Index c = 0; c < m.cols(); ++c) {
      auto bits = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
      std::memcpy(bytes.data() + offset, &bits, 4);
      offset += 4;
    }
  return {{"shape", {m.rows(), m.cols()}}, {"data", base64_encode(bytes)}};
}

nn::Matrix matrix_from_json(const json& j, const std::string& name) {
  auto shape = j.at("shape").get<std::vector<nn::Index>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0)
    throw Error("parameter '" + name + "' has an invalid shape");
  auto bytes = base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != static_cast<std::size_t>(shape[0] * shape[1]) * 4)
    throw Error("parameter '" + name + "' data does not match its shape");
  nn::Matrix m(shape[0], shape[1]);
  std::size_t offset = 0;
  for (nn::Index r = 0; r < m.rows(); ++r)
    for (nn::Index c = 0; c < m.cols(); ++c) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + offset, 4);
      offset += 4;
      m(r, c) = static_cast<double>(std::bit_cast<float>(to_little_endian(bits)));
    }
  return m;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error("base64 input length is not a multiple of 4");
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      char c = text[i + k];
      int d = 0;
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else {
        if (pad) throw Error("invalid base64 padding");
        d = value(c);
        if (d < 0) throw Error("invalid base64 character");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string serialize(const Tagger& tagger) {
  const auto& params = tagger.parameters();
  json parameters = json::object();
  for (std::size_t i = 0; i < params.size(); ++i)
    parameters[params.name(nn::ParamId{i})] = matrix_to_json(params.value(nn::ParamId{i}));
  const auto& v = tagger.vocabulary();
  json envelope = {
      {"format_version", kFormatVersion},
      {"model_kind", to_string(tagger.kind())},
      {"config", config_to_json(tagger.config())},
      {"alphabets", {{"labels", tagger.alphabet().strings()}}},
      {"vocabulary",
       {{"forms", feature_map_to_json(v.forms)},
        {"lemmas", feature_map_to_json(v.lemmas)},
        {"chars", feature_map_to_json(v.chars)},
        {"pos", feature_map_to_json(v.pos)}}},
      {"parameters", std::move(parameters)},
  };
  return envelope.dump() + "\n";
}

std::unique_ptr<Tagger> deserialize(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    int version = j.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw Error("unsupported model format_version " + std::to_string(version) + " (expected " +
                  std::to_string(kFormatVersion) + ")");
    ModelKind kind = parse_model_kind(j.at("model_kind").get<std::string>());
    TaggerConfig config = config_from_json(j.at("config"));

    auto labels = j.at("alphabets").at("labels").get<std::vector<std::string>>();
    if (labels.empty()) throw Error("model alphabet is empty");
    LabelAlphabet alphabet(labels.front());
    for (const auto& label : labels) alphabet.add(label);

    const json& vj = j.at("vocabulary");
    corpus::Vocabulary vocabulary;
    vocabulary.forms = feature_map_from_json(vj.at("forms"));
    vocabulary.lemmas = feature_map_from_json(vj.at("lemmas"));
    vocabulary.chars = feature_map_from_json(vj.at("chars"));
    vocabulary.pos = feature_map_from_json(vj.at("pos"));

    nn::Parameters params;
    const json& pj = j.at("parameters");
    for (const auto& [name, value] : pj.items()) params.add(name, matrix_from_json(value, name));

    if (kind == ModelKind::crf)
      return std::make_unique<CrfTagger>(config, std::move(vocabulary), std::move(alphabet),
                                         std::move(params));
    return std::make_unique<Seq2seqTagger>(config, std::move(vocabulary), std::move(alphabet),
                                           std::move(params));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void save(const Tagger& tagger, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << serialize(tagger);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::unique_ptr<Tagger> load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

}  // namespace nestner::models
