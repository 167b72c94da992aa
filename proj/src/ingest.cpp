#include "potflare/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "potflare/errors.hpp"
#include "potflare/format.hpp"
#include "potflare/gpd.hpp"
#include "potflare/random.hpp"

namespace potflare {
namespace {

constexpr std::string_view kHeader = "timestamp,flux_wm2";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_sentinel(double v, const std::vector<double>& sentinels) {
  return std::find(sentinels.begin(), sentinels.end(), v) != sentinels.end();
}

}  // namespace

FluxSeries::FluxSeries(std::vector<FluxSample> samples) : samples_(std::move(samples)) {
  if (!samples_.empty()) {
    span_start_ = samples_.front().time;
    span_end_ = samples_.back().time;
  }
  validate();
}

FluxSeries::FluxSeries(std::vector<FluxSample> samples, UtcMinute span_start, UtcMinute span_end)
    : samples_(std::move(samples)), span_start_(span_start), span_end_(span_end) {
  if (span_end_ < span_start_) throw DomainError("FluxSeries: span_end precedes span_start");
  validate();
  if (!samples_.empty() && (samples_.front().time < span_start_ || samples_.back().time > span_end_)) {
    throw DomainError("FluxSeries: samples fall outside the declared span");
  }
}

void FluxSeries::validate() {
  std::int64_t present = 0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (i > 0 && !(samples_[i - 1].time < s.time)) {
      throw OrderingError(i + 1, "timestamp " + format_utc_minute(s.time) + " does not follow " +
                                     format_utc_minute(samples_[i - 1].time));
    }
    if (!s.missing()) {
      if (!std::isfinite(s.flux) || s.flux < 0.0) throw DomainError("FluxSeries: flux must be finite and non-negative");
      ++present;
    }
  }
  n_observations_ = present;
}

std::int64_t FluxSeries::span_minutes() const noexcept {
  if (samples_.empty() && span_start_ == span_end_) return 0;
  return span_end_ - span_start_ + 1;
}

bool operator==(const FluxSeries& a, const FluxSeries& b) {
  if (a.span_start_ != b.span_start_ || a.span_end_ != b.span_end_ || a.samples_.size() != b.samples_.size()) {
    return false;
  }
  return std::equal(a.samples_.begin(), a.samples_.end(), b.samples_.begin(), [](const FluxSample& x, const FluxSample& y) {
    return x.time == y.time && (x.missing() ? y.missing() : x.flux == y.flux);
  });
}

void IngestConfig::validate() const {
  if (!(scaling_divisor > 0.0) || !std::isfinite(scaling_divisor)) throw DomainError("scaling_divisor must be positive");
  if (!(saturation_level > 0.0) || !std::isfinite(saturation_level)) throw DomainError("saturation_level must be positive");
}

FluxSeries parse_flux_csv(std::istream& source, const IngestConfig& config) {
  const std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  std::string_view rest = text;
  if (rest.starts_with("\xEF\xBB\xBF")) rest.remove_prefix(3);

  std::vector<FluxSample> samples;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!rest.empty()) {
    const auto eol = rest.find('\n');
    std::string_view line = trim(rest.substr(0, eol));
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    ++line_no;
    if (!header_seen) {
      if (line != kHeader) throw ParseError(line_no, "expected header `timestamp,flux_wm2`");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected two comma-separated fields");
    }
    const auto time = parse_utc_minute(trim(line.substr(0, comma)));
    if (!time) throw ParseError(line_no, "bad timestamp `" + std::string(line.substr(0, comma)) + "`");

    double flux = FluxSample::kMissing;
    const std::string_view field = trim(line.substr(comma + 1));
    if (!field.empty()) {
      const auto value = parse_double(field);
      if (!value) throw ParseError(line_no, "non-numeric flux `" + std::string(field) + "`");
      if (!is_sentinel(*value, config.missing_sentinels)) {
        if (!std::isfinite(*value) || *value < 0.0) throw ParseError(line_no, "flux must be finite and non-negative");
        flux = *value;
      }
    }
    if (!samples.empty() && !(samples.back().time < *time)) {
      throw OrderingError(line_no, "timestamp " + format_utc_minute(*time) + " is not after the previous row");
    }
    samples.push_back({*time, flux});
  }
  if (samples.empty()) throw EmptyInputError("flux CSV contains no data rows");
  return FluxSeries(std::move(samples));
}

FluxSeries read_flux_csv(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_flux_csv(in, config);
}

void write_flux_csv(std::ostream& out, const FluxSeries& series) {
  std::string buffer;
  buffer.reserve(64 * 1024);
  buffer.append(kHeader).push_back('\n');
  for (const auto& s : series.samples()) {
    buffer += format_utc_minute(s.time);
    buffer.push_back(',');
    if (!s.missing()) buffer += format_double(s.flux);
    buffer.push_back('\n');
    if (buffer.size() > 60 * 1024) {
      out << buffer;
      buffer.clear();
    }
  }
  out << buffer;
}

void write_flux_csv(const std::filesystem::path& path, const FluxSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_flux_csv(out, series);
}

FluxSeries apply_scaling(const FluxSeries& series, double divisor) {
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw DomainError("apply_scaling: divisor must be positive");
  std::vector<FluxSample> samples(series.samples().begin(), series.samples().end());
  for (auto& s : samples) {
    if (!s.missing()) s.flux /= divisor;
  }
  return FluxSeries(std::move(samples), series.span_start(), series.span_end());
}

SaturationResult filter_saturation(const FluxSeries& series, const IngestConfig& config) {
  config.validate();
  std::vector<FluxSample> samples(series.samples().begin(), series.samples().end());
  SaturationResult result;

  auto saturated = [&](const FluxSample& s) { return !s.missing() && s.flux >= config.saturation_level; };
  std::size_t i = 0;
  while (i < samples.size()) {
    if (!saturated(samples[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < samples.size() && saturated(samples[j]) && samples[j].time - samples[j - 1].time == 1) ++j;

    const auto date = utc_date(samples[i].time);
    const auto& keep = config.retained_saturation_events;
    if (std::find(keep.begin(), keep.end(), date) != keep.end()) {
      ++result.retained_runs;
    } else {
      for (std::size_t k = i; k < j; ++k) samples[k].flux = FluxSample::kMissing;
      ++result.removed_runs;
      result.removed_dates.push_back(date);
    }
    i = j;
  }
  result.series = FluxSeries(std::move(samples), series.span_start(), series.span_end());
  return result;
}

IngestResult ingest_stream(std::istream& source, const IngestConfig& config) {
  config.validate();
  auto scaled = apply_scaling(parse_flux_csv(source, config), config.scaling_divisor);
  auto filtered = filter_saturation(scaled, config);
  return {std::move(filtered.series), filtered.removed_runs, filtered.retained_runs, std::move(filtered.removed_dates)};
}

IngestResult ingest_file(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return ingest_stream(in, config);
}

FluxSeries concatenate(std::vector<FluxSeries> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  std::vector<FluxSample> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  std::optional<UtcMinute> start, end;
  for (auto& p : parts) {
    if (p.empty()) continue;
    start = start ? std::min(*start, p.span_start()) : p.span_start();
    end = end ? std::max(*end, p.span_end()) : p.span_end();
    auto samples = std::move(p).take_samples();
    all.insert(all.end(), samples.begin(), samples.end());
  }
  if (all.empty()) return {};
  return FluxSeries(std::move(all), *start, *end);
}

FluxSeries synth_clustered_series(const SynthParams& p) {
  const GpdParams gpd{p.scale, p.shape};
  gpd.validate();
  if (!(p.duration_years > 0.0) || !(p.event_rate >= 0.0) || !(p.cluster_length_mean >= 1.0) ||
      !(p.base_threshold >= p.activity_floor) || !(p.activity_floor > 0.0) || !(p.dip_probability >= 0.0) ||
      !(p.dip_probability < 1.0) || p.min_separation < 0) {
    throw DomainError("synth_clustered_series: invalid parameters");
  }

  Rng rng(p.seed);
  const auto n = static_cast<std::int64_t>(std::llround(p.duration_years * kMinutesPerYear));
  if (n < 1) throw DomainError("synth_clustered_series: duration shorter than one minute");

  std::vector<FluxSample> samples(static_cast<std::size_t>(n));
  const double log_lo = std::log(1e-3 * p.activity_floor);
  const double log_hi = std::log(0.5 * p.activity_floor);
  for (std::int64_t i = 0; i < n; ++i) {
    samples[static_cast<std::size_t>(i)] = {p.start + i, std::exp(rng.uniform(log_lo, log_hi))};
  }
  if (p.event_rate == 0.0) return FluxSeries(std::move(samples));

  const double per_minute = p.event_rate / kMinutesPerYear;
  const double stay = 1.0 - 1.0 / p.cluster_length_mean;
  std::int64_t t = 0;
  for (;;) {
    t += static_cast<std::int64_t>(std::ceil(-std::log(rng.uniform()) / per_minute));
    std::int64_t length = 1;
    if (stay > 0.0) length += static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / std::log(stay)));
    if (t + length > n) break;

    const std::int64_t peak_at = t + static_cast<std::int64_t>(std::floor(rng.uniform() * static_cast<double>(length)));
    const double peak = p.base_threshold + gpd_quantile(rng.uniform(), gpd);
    for (std::int64_t m = t; m < t + length; ++m) {
      double& flux = samples[static_cast<std::size_t>(m)].flux;
      if (m == peak_at) {
        flux = peak;
      } else if (rng.bernoulli(p.dip_probability)) {
        flux = p.activity_floor * rng.uniform(0.5, 1.0);
      } else {
        flux = p.activity_floor + rng.uniform(0.6, 1.0) * (peak - p.activity_floor);
      }
    }
    t += length + p.min_separation;
  }
  return FluxSeries(std::move(samples));
}

}  // namespace potflare
