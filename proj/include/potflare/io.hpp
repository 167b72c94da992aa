#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "potflare/decluster.hpp"
#include "potflare/diagnostics.hpp"
#include "potflare/gpd.hpp"
#include "potflare/returns.hpp"

namespace potflare {

using Json = nlohmann::ordered_json;

Json to_json(const GpdFit& fit);
GpdFit gpd_fit_from_json(const Json& j);

/// Catalog metadata plus the event list.
Json to_json(const EventCatalog& catalog);
EventCatalog event_catalog_from_json(const Json& j);

Json to_json(const GapSweepCurve& curve);
Json to_json(const MrlCurve& curve);
Json to_json(const ProbabilityPlot& plot);
Json to_json(const ReturnLevelCurve& curve);

// CSV writers, one row per point.
void write_catalog_csv(std::ostream& out, const EventCatalog& catalog);
void write_sweep_csv(std::ostream& out, const GapSweepCurve& curve);
void write_mrl_csv(std::ostream& out, const MrlCurve& curve);
void write_probplot_csv(std::ostream& out, const ProbabilityPlot& plot);
void write_returns_csv(std::ostream& out, const ReturnLevelCurve& curve);

/// One value per line; blank lines and `#` comments ignored.
std::vector<double> read_value_list(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string dump_json(const Json& j);

/// Writes via a callback on an opened binary ofstream.
template <class Writer>
void write_text_file(const std::filesystem::path& path, Writer&& writer);

}  // namespace potflare

#include <fstream>

#include "potflare/errors.hpp"

template <class Writer>
void potflare::write_text_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  writer(out);
  if (!out) throw Error("failed writing " + path.string());
}
