#include "reidkit/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::array<double, 3>> parse_triple(std::string_view s) {
  std::array<double, 3> out{};
  std::size_t n = 0;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (n == 3) return std::nullopt;
    const auto v = parse_number<double>(item);
    if (!v) return std::nullopt;
    out[n++] = *v;
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (n != 3) return std::nullopt;
  return out;
}

class Problems {
 public:
  explicit Problems(std::string_view source) : source_(source) {}

  void add(std::size_t line, const std::string& what) {
    out_ << "\n  " << source_ << ":" << line << ": " << what;
    ++count_;
  }

  void raise_if_any() const {
    if (count_ > 0) throw Error(ErrorCode::kConfig, "config errors:" + out_.str());
  }

 private:
  std::string source_;
  std::ostringstream out_;
  std::size_t count_ = 0;
};

}  // namespace

std::vector<ConfigEntry> parse_config(std::string_view text, std::string_view source) {
  std::vector<ConfigEntry> entries;
  std::map<std::string, std::size_t, std::less<>> seen;
  Problems problems(source);
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.add(line_no, "expected `key = value`, got \"" + std::string(line) + "\"");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      problems.add(line_no, "empty key or value");
      continue;
    }
    if (auto it = seen.find(key); it != seen.end()) {
      problems.add(line_no, "duplicate key \"" + std::string(key) + "\" (first on line " +
                                std::to_string(it->second) + ")");
      continue;
    }
    seen.emplace(std::string(key), line_no);
    entries.push_back({std::string(key), std::string(value), line_no});
  }
  problems.raise_if_any();
  return entries;
}

std::vector<ConfigEntry> read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

TrainConfig train_config_from(const std::vector<ConfigEntry>& entries, TrainConfig base,
                              std::string_view source) {
  Problems problems(source);
  for (const auto& e : entries) {
    auto as_double = [&](double& dst) {
      if (auto v = parse_number<double>(e.value)) {
        dst = *v;
      } else {
        problems.add(e.line, "\"" + e.key + "\" expects a number, got \"" + e.value + "\"");
      }
    };
    auto as_size = [&](std::size_t& dst) {
      if (auto v = parse_number<std::size_t>(e.value)) {
        dst = *v;
      } else {
        problems.add(e.line, "\"" + e.key + "\" expects a non-negative integer, got \"" + e.value + "\"");
      }
    };
    if (e.key == "margin") as_double(base.margin);
    else if (e.key == "learning_rate") as_double(base.learning_rate);
    else if (e.key == "weight_decay") as_double(base.weight_decay);
    else if (e.key == "epochs") as_size(base.epochs);
    else if (e.key == "plateau_factor") as_double(base.plateau_factor);
    else if (e.key == "plateau_patience") as_size(base.plateau_patience);
    else if (e.key == "p") as_size(base.pk.p);
    else if (e.key == "k") as_size(base.pk.k);
    else if (e.key == "embed_dim") as_size(base.embed_dim);
    else if (e.key == "adam_beta1") as_double(base.adam_beta1);
    else if (e.key == "adam_beta2") as_double(base.adam_beta2);
    else if (e.key == "adam_eps") as_double(base.adam_eps);
    else if (e.key == "seed") {
      if (auto v = parse_number<std::uint64_t>(e.value)) {
        base.seed = *v;
      } else {
        problems.add(e.line, "\"seed\" expects an unsigned 64-bit integer");
      }
    } else if (e.key == "mining") {
      if (e.value == "hard") base.mining = MiningStrategy::kHard;
      else if (e.value == "semihard" || e.value == "semi-hard") base.mining = MiningStrategy::kSemiHard;
      else problems.add(e.line, "\"mining\" must be hard or semihard");
    } else {
      problems.add(e.line, "unknown key \"" + e.key + "\"");
    }
  }
  problems.raise_if_any();
  return base;
}

PreprocessConfig preprocess_config_from(const std::vector<ConfigEntry>& entries,
                                        PreprocessConfig base, std::string_view source) {
  Problems problems(source);
  for (const auto& e : entries) {
    if (e.key == "target" || e.key == "crop_pad") {
      auto v = parse_number<std::size_t>(e.value);
      if (!v) {
        problems.add(e.line, "\"" + e.key + "\" expects a non-negative integer");
        continue;
      }
      (e.key == "target" ? base.transform.target : base.crop_pad) = *v;
    } else if (e.key == "pad_value") {
      auto v = parse_number<double>(e.value);
      if (!v) problems.add(e.line, "\"pad_value\" expects a number");
      else base.transform.pad_value = *v;
    } else if (e.key == "mean" || e.key == "std") {
      auto v = parse_triple(e.value);
      if (!v) problems.add(e.line, "\"" + e.key + "\" expects three comma-separated numbers");
      else (e.key == "mean" ? base.transform.mean : base.transform.std) = *v;
    } else {
      problems.add(e.line, "unknown key \"" + e.key + "\"");
    }
  }
  problems.raise_if_any();
  return base;
}

}  // namespace reidkit
