#include "ssig/checkpoint.hpp"

#include <fstream>
#include <string>

#include "ssig/error.hpp"

namespace ssig {

using nlohmann::json;

json state_to_json(const VariationalState& state) {
  json layers = json::array();
  for (const auto& p : state.layers) {
    layers.push_back({{"rows", p.mu.rows()},
                      {"cols", p.mu.cols()},
                      {"mu", std::vector<double>(p.mu.values().begin(), p.mu.values().end())},
                      {"rho", std::vector<double>(p.rho.values().begin(), p.rho.values().end())},
                      {"phi", p.phi}});
  }
  return json{{"format", "ssig-state"},
              {"format_version", kStateFormatVersion},
              {"arch",
               {{"widths", state.arch.widths},
                {"activation", std::string(to_string(state.arch.activation))},
                {"task", std::string(to_string(state.arch.task))}}},
              {"prior",
               {{"sigma0_2", state.prior.sigma0_2},
                {"sigma_e2", state.prior.sigma_e2},
                {"lambda", state.prior.lambda}}},
              {"mode", std::string(to_string(state.mode))},
              {"layers", std::move(layers)}};
}

VariationalState state_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "ssig-state") {
      throw FormatError("not an ssig state document");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kStateFormatVersion) {
      throw FormatError("unsupported state format_version " + std::to_string(version));
    }
    VariationalState state;
    const auto& a = doc.at("arch");
    state.arch.widths = a.at("widths").get<std::vector<std::size_t>>();
    state.arch.activation = parse_activation(a.at("activation").get<std::string>());
    state.arch.task = parse_task(a.at("task").get<std::string>());
    const auto& pr = doc.at("prior");
    state.prior.sigma0_2 = pr.at("sigma0_2").get<double>();
    state.prior.sigma_e2 = pr.at("sigma_e2").get<double>();
    state.prior.lambda = pr.at("lambda").get<std::vector<double>>();
    state.mode = parse_mode(doc.at("mode").get<std::string>());
    for (const auto& l : doc.at("layers")) {
      const auto rows = l.at("rows").get<std::size_t>();
      const auto cols = l.at("cols").get<std::size_t>();
      LayerParams p{Matrix(rows, cols, l.at("mu").get<std::vector<double>>()),
                    Matrix(rows, cols, l.at("rho").get<std::vector<double>>()),
                    l.at("phi").get<std::vector<double>>()};
      state.layers.push_back(std::move(p));
    }
    state.validate();
    return state;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed state document: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed state document: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("malformed state document: ") + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_state(const std::filesystem::path& path, const VariationalState& state) {
  write_json_file(path, state_to_json(state));
}

VariationalState load_state(const std::filesystem::path& path) {
  return state_from_json(read_json_file(path));
}

}  // namespace ssig
