#include "pnpcdft/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pnpcdft {

namespace {

using nlohmann::json;

json history_to_json(const std::vector<IterationRecord>& history, bool with_seconds) {
  json arr = json::array();
  for (const IterationRecord& r : history) {
    json rec = {{"iteration", r.iteration},
                {"delta_u", r.delta_u},
                {"delta_rho", r.delta_rho},
                {"max_packing", r.max_packing},
                {"poisson_cycles", r.poisson_cycles},
                {"np_cycles", r.np_cycles}};
    if (with_seconds) rec["seconds"] = r.seconds;
    arr.push_back(std::move(rec));
  }
  return arr;
}

std::vector<IterationRecord> history_from_json(const json& arr) {
  std::vector<IterationRecord> out;
  for (const json& rec : arr) {
    IterationRecord r;
    r.iteration = rec.at("iteration").get<int>();
    r.delta_u = rec.at("delta_u").get<double>();
    r.delta_rho = rec.at("delta_rho").get<double>();
    r.max_packing = rec.at("max_packing").get<double>();
    r.poisson_cycles = rec.at("poisson_cycles").get<int>();
    r.np_cycles = rec.at("np_cycles").get<std::vector<int>>();
    r.seconds = rec.value("seconds", 0.0);
    out.push_back(std::move(r));
  }
  return out;
}

json build_json(const SolveReport& rep, bool with_timing) {
  json config = json::object();
  for (const auto& [key, value] : rep.config) config[key] = value;

  json species = json::array();
  for (std::size_t m = 0; m < rep.species_names.size(); ++m) {
    species.push_back({{"name", rep.species_names[m]},
                       {"mean_plane_current_per_s",
                        m < rep.species_plane_current.size() ? rep.species_plane_current[m] : 0.0}});
  }

  json doc = {
      {"format", "pnpcdft-report 1"},
      {"version", rep.version},
      {"git_revision", rep.git_revision},
      {"config", std::move(config)},
      {"converged", rep.converged},
      {"termination", rep.termination},
      {"observables",
       {{"sigma_S_per_cm", rep.sigma_S_per_cm},
        {"short_range_energy_eV", rep.short_range_energy_eV},
        {"plane_flux_spread", rep.plane_flux_spread},
        {"max_packing", rep.max_packing},
        {"species", std::move(species)}}},
      {"equilibrium", history_to_json(rep.equilibrium, with_timing)},
      {"transport", history_to_json(rep.transport, with_timing)},
  };
  if (with_timing) {
    doc["timing"] = {{"total_seconds", rep.total_seconds},
                     {"solver_seconds", rep.solver_seconds},
                     {"fft_seconds", rep.fft_seconds},
                     {"quadrature_seconds", rep.quadrature_seconds}};
  }
  return doc;
}

}  // namespace

std::string report_to_json(const SolveReport& report) { return build_json(report, true).dump(2); }

std::string report_to_canonical_json(const SolveReport& report) {
  return build_json(report, false).dump(2);
}

SolveReport report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format", "") != "pnpcdft-report 1") {
    throw std::runtime_error("not a pnpcdft report document");
  }
  SolveReport rep;
  rep.version = doc.value("version", "");
  rep.git_revision = doc.value("git_revision", "");
  for (const auto& [key, value] : doc.at("config").items()) {
    rep.config.emplace_back(key, value.get<std::string>());
  }
  rep.converged = doc.at("converged").get<bool>();
  rep.termination = doc.value("termination", "");
  const json& obs = doc.at("observables");
  rep.sigma_S_per_cm = obs.at("sigma_S_per_cm").get<double>();
  rep.short_range_energy_eV = obs.at("short_range_energy_eV").get<double>();
  rep.plane_flux_spread = obs.at("plane_flux_spread").get<double>();
  rep.max_packing = obs.at("max_packing").get<double>();
  for (const json& sp : obs.at("species")) {
    rep.species_names.push_back(sp.at("name").get<std::string>());
    rep.species_plane_current.push_back(sp.at("mean_plane_current_per_s").get<double>());
  }
  rep.equilibrium = history_from_json(doc.at("equilibrium"));
  rep.transport = history_from_json(doc.at("transport"));
  if (doc.contains("timing")) {
    const json& t = doc["timing"];
    rep.total_seconds = t.value("total_seconds", 0.0);
    rep.solver_seconds = t.value("solver_seconds", 0.0);
    rep.fft_seconds = t.value("fft_seconds", 0.0);
    rep.quadrature_seconds = t.value("quadrature_seconds", 0.0);
  }
  return rep;
}

void write_report_file(const std::string& path, const SolveReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file `" + path + "`");
  out << report_to_json(report) << "\n";
  if (!out) throw std::runtime_error("short write on report file `" + path + "`");
}

SolveReport read_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report file `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

void write_checkpoint(const std::string& directory, const Checkpoint& cp) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  if (cp.state.rho.size() != cp.species_names.size()) {
    throw std::invalid_argument("checkpoint species names do not match density fields");
  }

  cp.state.u.dump_file((fs::path(directory) / "u.field").string());
  nlohmann::json densities = nlohmann::json::array();
  for (std::size_t m = 0; m < cp.state.rho.size(); ++m) {
    const std::string file = "rho_" + cp.species_names[m] + ".field";
    cp.state.rho[m].dump_file((fs::path(directory) / file).string());
    densities.push_back({{"name", cp.species_names[m]}, {"file", file}});
  }

  const nlohmann::json manifest = {{"format", "pnpcdft-checkpoint 1"},
                                   {"phase", cp.phase},
                                   {"iteration", cp.iteration},
                                   {"potential", "u.field"},
                                   {"densities", std::move(densities)}};
  std::ofstream out(fs::path(directory) / "checkpoint.json");
  if (!out) throw std::runtime_error("cannot write checkpoint manifest in `" + directory + "`");
  out << manifest.dump(2) << "\n";
}

Checkpoint read_checkpoint(const std::string& directory) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(directory) / "checkpoint.json");
  if (!in) throw std::runtime_error("cannot open checkpoint manifest in `" + directory + "`");
  nlohmann::json manifest;
  in >> manifest;
  if (manifest.value("format", "") != "pnpcdft-checkpoint 1") {
    throw std::runtime_error("not a pnpcdft checkpoint manifest");
  }

  Checkpoint cp;
  cp.phase = manifest.at("phase").get<std::string>();
  cp.iteration = manifest.at("iteration").get<int>();
  cp.state.u =
      ScalarField::load_file((fs::path(directory) / manifest.at("potential").get<std::string>())
                                 .string());
  for (const nlohmann::json& d : manifest.at("densities")) {
    cp.species_names.push_back(d.at("name").get<std::string>());
    cp.state.rho.push_back(
        ScalarField::load_file((fs::path(directory) / d.at("file").get<std::string>()).string()));
    if (!cp.state.rho.back().grid().same_shape(cp.state.u.grid())) {
      throw std::runtime_error("checkpoint fields disagree on the grid shape");
    }
  }
  return cp;
}

}  // namespace pnpcdft
