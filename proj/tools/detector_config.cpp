#include "detector_config.hpp"

#include <json.hpp>

#include "fuselage/error.hpp"
#include "fuselage/io.hpp"

namespace fuselage::cli {

namespace {

using nlohmann::json;

std::array<double, 5> ladder(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 5) throw ConfigError(where + ": expected an array of 5 numbers");
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace

SimDetectorSpec parse_detector_config(const std::string& text, SimDetectorSpec s,
                                      const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  for (const auto& [key, v] : j.items()) {
    const std::string where = source + ": " + key;
    if (key == "modality") {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
      s.modality = parse_modality(v.get<std::string>());
    } else if (key == "sigma_base") {
      s.sigma_base = number(v, where);
    } else if (key == "miss_rate") {
      s.miss_rate = number(v, where);
    } else if (key == "fp_rate") {
      s.fp_rate = number(v, where);
    } else if (key == "fidelity") {
      s.fidelity = number(v, where);
    } else if (key == "var_constant") {
      s.var_constant = number(v, where);
    } else if (key == "score_gamma") {
      s.score_gamma = number(v, where);
    } else if (key == "score_jitter") {
      s.score_jitter = number(v, where);
    } else if (key == "fp_score_max") {
      s.fp_score_max = number(v, where);
    } else if (key == "candidates") {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
      s.candidates = v.get<int>();
    } else if (key == "image_width" || key == "image_height") {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
      (key == "image_width" ? s.image_width : s.image_height) = v.get<int>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError(where + ": expected an unsigned integer");
      s.seed = v.get<std::uint64_t>();
    } else if (key == "response") {
      if (!v.is_object()) throw ConfigError(where + ": expected an object");
      for (const auto& [kind, r] : v.items()) {
        auto& dst = s.response[static_cast<std::size_t>(parse_corruption(kind))];
        if (!r.is_object()) throw ConfigError(where + "." + kind + ": expected an object");
        for (const auto& [field, arr] : r.items()) {
          const std::string w = where + "." + kind + "." + field;
          if (field == "sigma_mult") {
            dst.sigma_mult = ladder(arr, w);
          } else if (field == "miss_mult") {
            dst.miss_mult = ladder(arr, w);
          } else if (field == "fp_mult") {
            dst.fp_mult = ladder(arr, w);
          } else {
            throw ConfigError(w + ": unknown field");
          }
        }
      }
    } else {
      throw ConfigError(where + ": unknown field");
    }
  }
  validate(s);
  return s;
}

SimDetectorSpec load_detector_config(const std::filesystem::path& path, SimDetectorSpec base) {
  const auto bytes = io::read_bytes(path);
  const std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return parse_detector_config(text, std::move(base), path.string());
}

std::string dump_detector_config(const SimDetectorSpec& s) {
  json j;
  j["modality"] = std::string(modality_name(s.modality));
  j["sigma_base"] = s.sigma_base;
  j["miss_rate"] = s.miss_rate;
  j["fp_rate"] = s.fp_rate;
  j["fidelity"] = s.fidelity;
  j["var_constant"] = s.var_constant;
  j["score_gamma"] = s.score_gamma;
  j["score_jitter"] = s.score_jitter;
  j["fp_score_max"] = s.fp_score_max;
  j["candidates"] = s.candidates;
  j["image_width"] = s.image_width;
  j["image_height"] = s.image_height;
  j["seed"] = s.seed;
  for (CorruptionKind k : kAllCorruptions) {
    const auto& r = s.response[static_cast<std::size_t>(k)];
    j["response"][std::string(corruption_name(k))] = {
        {"sigma_mult", r.sigma_mult}, {"miss_mult", r.miss_mult}, {"fp_mult", r.fp_mult}};
  }
  return j.dump(2) + "\n";
}

}  // namespace fuselage::cli
