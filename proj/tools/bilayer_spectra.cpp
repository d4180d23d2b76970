#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "bilayer/error.hpp"
#include "bilayer/experiments.hpp"

namespace {

using nlohmann::json;

json records_json(const bilayer::Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { obj[table.columns[i].name] = v; }, row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bilayer::Error(bilayer::Errc::io, path + ": cannot open for writing");
  out << text;
  if (!out.flush()) throw bilayer::Error(bilayer::Errc::io, path + ": write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral experiments for bilayer Dirac-type operators with complex potentials"};
  app.set_version_flag("--version", std::string(bilayer::version_string()));
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  for (const auto& name : bilayer::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output path (stdout if omitted)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = bilayer::load_config(config_path);
    const auto result = bilayer::run(command, config);
    if (format == "csv") {
      emit(out_path, bilayer::to_csv(result.table));
    } else {
      // serialize the CSV first so non-finite rows are rejected the same way
      (void)bilayer::to_csv(result.table);
      auto doc = bilayer::summary_document(result, config);
      doc["records"] = records_json(result.table);
      emit(out_path, doc.dump(2) + "\n");
    }
  } catch (const bilayer::Error& e) {
    std::cerr << "bilayer-spectra: " << bilayer::to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == bilayer::Errc::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "bilayer-spectra: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
