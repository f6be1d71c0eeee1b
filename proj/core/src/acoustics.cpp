#include "rirkit/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "rirkit/error.hpp"

namespace rirkit {

Rir::Rir(std::vector<double> samples, int sample_rate, std::optional<std::size_t> boundary)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  RIRKIT_REQUIRE(!samples_.empty(), "rir: must contain at least one sample");
  RIRKIT_REQUIRE(sample_rate_ > 0, "rir: sample rate must be positive");
  for (double s : samples_) RIRKIT_REQUIRE(std::isfinite(s), "rir: non-finite sample");
  boundary_ = boundary.value_or(std::min(kDefaultEarlyLateBoundary, samples_.size()));
  RIRKIT_REQUIRE(boundary_ <= samples_.size(),
                 "rir: boundary " + std::to_string(boundary_) + " exceeds length " +
                     std::to_string(samples_.size()));
}

Rir Rir::from_audio(const AudioBuffer& audio, std::optional<std::size_t> boundary) {
  return Rir(audio.vector(), audio.sample_rate(), boundary);
}

Rir Rir::with_boundary(std::size_t boundary) const {
  return Rir(samples_, sample_rate_, boundary);
}

EdcCurve energy_decay_curve(const Rir& h) {
  const auto s = h.samples();
  std::vector<double> energy(s.size());
  double acc = 0.0;
  for (std::size_t i = s.size(); i-- > 0;) {
    acc += s[i] * s[i];
    energy[i] = acc;
  }
  const double total = energy.front();
  RIRKIT_REQUIRE(total > 0.0, "edc: RIR has zero energy");

  EdcCurve edc{std::move(energy), h.sample_rate()};
  for (double& e : edc.values_db) {
    e = e > 0.0 ? std::max(10.0 * std::log10(e / total), kEdcFloorDb) : kEdcFloorDb;
  }
  edc.values_db.front() = 0.0;
  return edc;
}

namespace {

// Fractional index where a non-increasing curve first drops to `level`.
std::optional<double> crossing(const std::vector<double>& db, double level) {
  if (db.front() <= level) return 0.0;
  for (std::size_t i = 1; i < db.size(); ++i) {
    if (db[i] <= level) {
      const double span = db[i - 1] - db[i];
      const double frac = span > 0.0 ? (db[i - 1] - level) / span : 0.0;
      return static_cast<double>(i - 1) + frac;
    }
  }
  return std::nullopt;
}

}  // namespace

double decay_time(const EdcCurve& edc, double upper_db, double lower_db) {
  RIRKIT_REQUIRE(upper_db > lower_db, "decay_time: upper level must exceed lower level");
  const auto& db = edc.values_db;
  RIRKIT_REQUIRE(!db.empty(), "decay_time: empty EDC");
  const auto lower_cross = crossing(db, lower_db);
  RIRKIT_REQUIRE(lower_cross.has_value(),
                 "decay_time: insufficient decay range, EDC never reaches " +
                     std::to_string(static_cast<int>(lower_db)) + " dB");

  const double fs = edc.sample_rate;
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i] > upper_db) continue;
    if (db[i] < lower_db) break;
    const double t = static_cast<double>(i) / fs;
    n += 1.0;
    sx += t;
    sy += db[i];
    sxx += t * t;
    sxy += t * db[i];
  }

  double slope = 0.0;
  const double denom = n * sxx - sx * sx;
  if (n >= 2.0 && denom > 0.0) {
    slope = (n * sxy - sx * sy) / denom;
  } else {
    const double t_upper = crossing(db, upper_db).value() / fs;
    const double t_lower = *lower_cross / fs;
    RIRKIT_REQUIRE(t_lower > t_upper, "decay_time: degenerate decay span");
    slope = (lower_db - upper_db) / (t_lower - t_upper);
  }
  RIRKIT_REQUIRE(slope < 0.0, "decay_time: EDC fit has non-negative slope");
  return -60.0 / slope;
}

double t60(const Rir& h) { return decay_time(energy_decay_curve(h), -5.0, -35.0); }

double edt(const Rir& h) { return decay_time(energy_decay_curve(h), 0.0, -10.0); }

DrrResult drr(const Rir& h) {
  const auto s = h.samples();
  std::size_t peak = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::abs(s[i]) > std::abs(s[peak])) peak = i;
  }
  RIRKIT_REQUIRE(s[peak] != 0.0, "drr: RIR is all zeros");

  const auto half = static_cast<std::size_t>(std::lround(kDirectWindowSeconds * h.sample_rate()));
  const std::size_t lo = peak > half ? peak - half : 0;
  const std::size_t hi = std::min(s.size() - 1, peak + half);
  double direct = 0.0, reflected = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (i >= lo && i <= hi ? direct : reflected) += s[i] * s[i];
  }
  if (reflected == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(direct / reflected), false};
}

EarlyLate split_early_late(const Rir& h, std::size_t boundary) {
  RIRKIT_REQUIRE(boundary <= h.size(), "split_early_late: boundary " + std::to_string(boundary) +
                                           " out of range [0, " + std::to_string(h.size()) + "]");
  std::vector<double> early(h.size(), 0.0), late(h.size(), 0.0);
  const auto s = h.samples();
  std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(boundary), early.begin());
  std::copy(s.begin() + static_cast<std::ptrdiff_t>(boundary), s.end(),
            late.begin() + static_cast<std::ptrdiff_t>(boundary));
  return {Rir(std::move(early), h.sample_rate(), boundary),
          Rir(std::move(late), h.sample_rate(), boundary)};
}

double component_mse(const Rir& a, const Rir& b, Region region) {
  RIRKIT_REQUIRE(a.size() == b.size(), "component_mse: length mismatch (" +
                                           std::to_string(a.size()) + " vs " +
                                           std::to_string(b.size()) + ")");
  RIRKIT_REQUIRE(a.boundary() == b.boundary(), "component_mse: boundary mismatch");
  std::size_t lo = 0, hi = a.size();
  if (region == Region::Early) hi = b.boundary();
  if (region == Region::Late) lo = b.boundary();
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

AcousticReport acoustic_error_report(const Rir& est, const Rir& gt) {
  RIRKIT_REQUIRE(est.size() == gt.size(), "report: estimate and ground truth lengths differ");
  const Rir aligned = est.with_boundary(gt.boundary());

  AcousticReport r;
  r.t60_error_ms = std::abs(t60(aligned) - t60(gt)) * 1000.0;
  r.edt_error_ms = std::abs(edt(aligned) - edt(gt)) * 1000.0;
  const DrrResult de = drr(aligned), dg = drr(gt);
  if (de.unbounded || dg.unbounded) {
    RIRKIT_REQUIRE(de.unbounded && dg.unbounded,
                   "report: DRR is unbounded for only one of the RIRs");
    r.drr_error_db = 0.0;
  } else {
    r.drr_error_db = std::abs(de.db - dg.db);
  }
  r.emse = component_mse(aligned, gt, Region::Early);
  r.lmse = component_mse(aligned, gt, Region::Late);
  return r;
}

std::string to_json(const AcousticReport& report) {
  nlohmann::ordered_json j;
  j["t60_error"] = report.t60_error_ms;
  j["drr_error"] = report.drr_error_db;
  j["edt_error"] = report.edt_error_ms;
  j["emse"] = report.emse;
  j["lmse"] = report.lmse;
  return j.dump();
}

AcousticReport acoustic_report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_error(std::string("report json: ") + e.what());
  }
  AcousticReport r;
  try {
    r.t60_error_ms = j.at("t60_error").get<double>();
    r.drr_error_db = j.at("drr_error").get<double>();
    r.edt_error_ms = j.at("edt_error").get<double>();
    r.emse = j.at("emse").get<double>();
    r.lmse = j.at("lmse").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw_error(std::string("report json: ") + e.what());
  }
  return r;
}

}  // namespace rirkit
