#pragma once

#include <cstdint>
#include <string>

#include "hpn/model.hpp"

namespace hpn {

// Versioned JSON checkpoint: config echo, every matrix as a row-major float
// array, store contents with provenance, and the run seed. Doubles round-trip
// bit-exactly through nlohmann::json's shortest-representation printer.
std::string checkpoint_to_json(const HpnModel& model, std::uint64_t seed);

struct LoadedCheckpoint {
  HpnModel model;
  std::uint64_t seed = 0;
};

LoadedCheckpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const HpnModel& model, std::uint64_t seed, const std::string& path);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace hpn
