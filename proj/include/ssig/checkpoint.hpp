#pragma once

// JSON state documents:
//   { "format": "ssig-state", "format_version": 1,
//     "arch":  { "widths": [...], "activation": "...", "task": "..." },
//     "prior": { "sigma0_2": x, "sigma_e2": x, "lambda": [...] },
//     "mode":  "ssig" | "dense",
//     "layers": [ { "rows": r, "cols": c, "mu": [...], "rho": [...], "phi": [...] } ],
//     "trainer": { ... }   // optional, written by the trainer }
// Doubles are written in shortest round-trip form, so a save/load cycle is
// bit-exact.

#include <filesystem>

#include <json.hpp>

#include "ssig/model.hpp"

namespace ssig {

inline constexpr int kStateFormatVersion = 1;

nlohmann::json state_to_json(const VariationalState& state);
// Throws FormatError on missing fields, unknown versions or bad shapes.
VariationalState state_from_json(const nlohmann::json& doc);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

void save_state(const std::filesystem::path& path, const VariationalState& state);
VariationalState load_state(const std::filesystem::path& path);

}  // namespace ssig
