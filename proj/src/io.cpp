#include "potflare/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "potflare/errors.hpp"
#include "potflare/format.hpp"
#include "potflare/time.hpp"

namespace potflare {
namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

UtcMinute time_field(const Json& j, const char* key) {
  const auto t = parse_utc_minute(j.at(key).get<std::string>());
  if (!t) throw Error(std::string("bad timestamp in field ") + key);
  return *t;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string{}; }

}  // namespace

Json to_json(const GpdFit& fit) {
  Json j;
  j["threshold"] = fit.threshold;
  j["scale"] = fit.params.scale;
  j["shape"] = fit.params.shape;
  j["covariance"] = fit.covariance ? Json(*fit.covariance) : Json(nullptr);
  j["std_errors"] = fit.std_errors ? Json(*fit.std_errors) : Json(nullptr);
  j["n_excesses"] = fit.n_excesses;
  j["n_total"] = fit.n_total;
  j["log_likelihood"] = fit.log_likelihood;
  j["convergence"] = {{"iterations", fit.convergence.iterations},
                      {"evaluations", fit.convergence.evaluations},
                      {"restarts", fit.convergence.restarts},
                      {"simplex_size", fit.convergence.simplex_size},
                      {"converged", fit.convergence.converged}};
  return j;
}

GpdFit gpd_fit_from_json(const Json& j) {
  try {
    GpdFit fit;
    fit.threshold = j.at("threshold").get<double>();
    fit.params = {j.at("scale").get<double>(), j.at("shape").get<double>()};
    if (!j.at("covariance").is_null()) fit.covariance = j.at("covariance").get<std::array<double, 4>>();
    if (!j.at("std_errors").is_null()) fit.std_errors = j.at("std_errors").get<std::array<double, 2>>();
    fit.n_excesses = j.at("n_excesses").get<std::int64_t>();
    fit.n_total = j.at("n_total").get<std::int64_t>();
    fit.log_likelihood = j.at("log_likelihood").get<double>();
    const auto& c = j.at("convergence");
    fit.convergence = {c.at("iterations").get<int>(), c.at("evaluations").get<int>(), c.at("restarts").get<int>(),
                       c.at("simplex_size").get<double>(), c.at("converged").get<bool>()};
    fit.params.validate();
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed fit document: ") + e.what());
  }
}

Json to_json(const EventCatalog& catalog) {
  Json j;
  j["decluster_threshold"] = catalog.decluster_threshold;
  j["gap_minutes"] = catalog.gap_minutes;
  j["n_total_observations"] = catalog.n_total_observations;
  j["span_years"] = catalog.span_years;
  j["missing_policy"] = catalog.missing_policy;
  j["n_events"] = catalog.events.size();
  Json events = Json::array();
  for (const auto& e : catalog.events) {
    events.push_back({{"peak_time", format_utc_minute(e.peak_time)},
                      {"peak_flux", e.peak_flux},
                      {"cluster_start", format_utc_minute(e.cluster_start)},
                      {"cluster_end", format_utc_minute(e.cluster_end)},
                      {"cluster_samples", e.cluster_sample_count}});
  }
  j["events"] = std::move(events);
  return j;
}

EventCatalog event_catalog_from_json(const Json& j) {
  try {
    EventCatalog c;
    c.decluster_threshold = j.at("decluster_threshold").get<double>();
    c.gap_minutes = j.at("gap_minutes").get<int>();
    c.n_total_observations = j.at("n_total_observations").get<std::int64_t>();
    c.span_years = j.at("span_years").get<double>();
    c.missing_policy = j.at("missing_policy").get<std::string>();
    for (const auto& e : j.at("events")) {
      c.events.push_back({time_field(e, "peak_time"), e.at("peak_flux").get<double>(), time_field(e, "cluster_start"),
                          time_field(e, "cluster_end"), e.at("cluster_samples").get<std::int64_t>()});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed catalog document: ") + e.what());
  }
}

Json to_json(const GapSweepCurve& curve) {
  Json points = Json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"gap_minutes", p.gap_minutes},
                      {"lag1_autocorrelation", p.lag1_autocorrelation ? Json(*p.lag1_autocorrelation) : Json(nullptr)},
                      {"event_count", p.event_count}});
  }
  return {{"series", "event-peak-fluxes"}, {"points", std::move(points)}};
}

Json to_json(const MrlCurve& curve) {
  Json points = Json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"u0", p.u0}, {"mean_excess", p.mean_excess}, {"ci_halfwidth", p.ci_halfwidth}, {"n_exceed", p.n_exceed}});
  }
  return {{"ci_level", curve.ci_level}, {"ci_method", "normal-mean"}, {"points", std::move(points)}};
}

Json to_json(const ProbabilityPlot& plot) {
  Json points = Json::array();
  for (const auto& p : plot.points) points.push_back({{"empirical", p.empirical}, {"model", p.model}});
  return {{"max_abs_deviation_from_diagonal", plot.max_abs_deviation_from_diagonal}, {"points", std::move(points)}};
}

Json to_json(const ReturnLevelCurve& curve) {
  Json points = Json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"m_years", p.m_years},
                      {"level", p.level},
                      {"ci_low", number_or_null(p.ci_low)},
                      {"ci_high", number_or_null(p.ci_high)},
                      {"symmetric_low", number_or_null(p.symmetric_low)},
                      {"symmetric_high", number_or_null(p.symmetric_high)}});
  }
  return {{"ci_level", curve.ci_level}, {"ci_method", curve.ci_method}, {"points", std::move(points)}};
}

void write_catalog_csv(std::ostream& out, const EventCatalog& catalog) {
  out << "peak_time,peak_flux,cluster_start,cluster_end,cluster_samples\n";
  for (const auto& e : catalog.events) {
    out << format_utc_minute(e.peak_time) << ',' << format_double(e.peak_flux) << ',' << format_utc_minute(e.cluster_start)
        << ',' << format_utc_minute(e.cluster_end) << ',' << e.cluster_sample_count << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const GapSweepCurve& curve) {
  out << "gap_minutes,lag1_autocorrelation,event_count\n";
  for (const auto& p : curve.points) {
    out << p.gap_minutes << ',' << (p.lag1_autocorrelation ? format_double(*p.lag1_autocorrelation) : "") << ','
        << p.event_count << '\n';
  }
}

void write_mrl_csv(std::ostream& out, const MrlCurve& curve) {
  out << "u0,mean_excess,ci_halfwidth,n_exceed\n";
  for (const auto& p : curve.points) {
    out << format_double(p.u0) << ',' << format_double(p.mean_excess) << ',' << format_double(p.ci_halfwidth) << ','
        << p.n_exceed << '\n';
  }
}

void write_probplot_csv(std::ostream& out, const ProbabilityPlot& plot) {
  out << "empirical,model\n";
  for (const auto& p : plot.points) out << format_double(p.empirical) << ',' << format_double(p.model) << '\n';
}

void write_returns_csv(std::ostream& out, const ReturnLevelCurve& curve) {
  out << "m_years,level,ci_low,ci_high\n";
  for (const auto& p : curve.points) {
    out << format_double(p.m_years) << ',' << format_double(p.level) << ',' << csv_number(p.ci_low) << ','
        << csv_number(p.ci_high) << '\n';
  }
}

std::vector<double> read_value_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    while (!v.empty() && (v.back() == '\r' || v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    if (v.empty() || v.front() == '#') continue;
    const auto x = parse_double(v);
    if (!x) throw ParseError(line_no, "not a number: `" + std::string(v) + "`");
    values.push_back(*x);
  }
  return values;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, [&](std::ostream& out) { out << dump_json(j); });
}

}  // namespace potflare
