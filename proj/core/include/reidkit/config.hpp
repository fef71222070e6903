#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "reidkit/preprocess.hpp"
#include "reidkit/trainer.hpp"

namespace reidkit {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// UTF-8 `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Malformed and duplicate lines are all reported in one kConfig error.
std::vector<ConfigEntry> parse_config(std::string_view text, std::string_view source = "<config>");
std::vector<ConfigEntry> read_config(const std::filesystem::path& path);

/// Applies entries on top of `base`. Keys: margin, learning_rate, weight_decay,
/// epochs, plateau_factor, plateau_patience, p, k, seed, embed_dim,
/// adam_beta1, adam_beta2, adam_eps, mining (hard|semihard). Unknown keys and
/// unparsable values are errors listing the offending lines.
TrainConfig train_config_from(const std::vector<ConfigEntry>& entries, TrainConfig base = {},
                              std::string_view source = "<config>");

struct PreprocessConfig {
  TransformConfig transform;
  std::size_t crop_pad = 2;
};

/// Keys: target, pad_value, crop_pad, mean, std (the last two as "a, b, c").
PreprocessConfig preprocess_config_from(const std::vector<ConfigEntry>& entries,
                                        PreprocessConfig base = {},
                                        std::string_view source = "<config>");

}  // namespace reidkit
