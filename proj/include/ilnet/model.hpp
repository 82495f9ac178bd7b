#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ilnet/backbone.hpp"
#include "ilnet/heads.hpp"

namespace ilnet {

// Fixed conv stack plus the two trainable heads, both fed by a 3x3 conv3 window.
struct NetworkModel {
  ConvBackboneSpec spec;
  BackboneWeights conv;
  HeadParams object_head;  // 2 logits
  HeadParams loc_head;     // 5 logits

  int window_features() const { return 3 * 3 * spec.output_channels(); }
};

// Random conv weights and heads window_features -> hidden... -> {2, 5}.
NetworkModel make_model(const ConvBackboneSpec& spec, std::span<const int> hidden, Rng& rng);

// Hidden widths used by the two built-in backbone choices.
std::vector<int> desk_hidden();
std::vector<int> vggm_hidden();

// "ILNW" binary container, little-endian, trailing CRC32.
std::vector<std::uint8_t> save_weights(const NetworkModel& model);

// Reads a stream written by save_weights. Every tensor must match the shape in `like`;
// conv tensors are required, each head is replaced only when all its tensors are present.
NetworkModel load_weights(std::span<const std::uint8_t> bytes, const NetworkModel& like);

void write_weight_file(const std::string& path, const NetworkModel& model);
NetworkModel read_weight_file(const std::string& path, const NetworkModel& like);

}  // namespace ilnet
