// Model files: a JSON envelope
//   {format_version: 1, model_kind, config, alphabets, vocabulary, parameters}
// with each parameter stored as {shape: [rows, cols], data: base64 of
// row-major little-endian 32-bit floats}. Pretrained vectors are not stored;
// the loader re-attaches them.

#ifndef NESTNER_MODELS_SERIALIZATION_HPP
#define NESTNER_MODELS_SERIALIZATION_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nestner/models/tagger.hpp"

namespace nestner::models {

inline constexpr int kFormatVersion = 1;

std::string serialize(const Tagger& tagger);
std::unique_ptr<Tagger> deserialize(std::string_view text);

void save(const Tagger& tagger, const std::string& path);
std::unique_ptr<Tagger> load(const std::string& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace nestner::models

#endif  // NESTNER_MODELS_SERIALIZATION_HPP
