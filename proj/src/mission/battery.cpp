#include "marsupial/mission/battery.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::mission {

BatteryPack battery_step(BatteryPack pack, double draw_w, double dt_s) {
  if (!(draw_w >= 0.0)) throw InvalidArgumentError("draw must be >= 0");
  if (!(dt_s > 0.0)) throw InvalidArgumentError("dt must be > 0");
  if (!(pack.capacity_wh > 0.0)) throw InvalidArgumentError("capacity must be > 0");
  if (pack.depleted) return pack;
  double soc = pack.soc - draw_w * dt_s / (3600.0 * pack.capacity_wh);
  if (pack.floor > 0.0) soc = std::max(soc, std::min(pack.floor, pack.soc));
  if (soc <= 0.0) {
    soc = 0.0;
    pack.depleted = true;
  }
  pack.soc = soc;
  return pack;
}

double preset_draw(const std::string& name) {
  if (name == "tether") return kTetherSystemDrawW;
  if (name == "fitted") return kFittedDrawW;
  if (name == "reported") return kReportedDrawW;
  throw InvalidArgumentError(fmt::format("unknown draw preset '{}'", name));
}

void PowerConfig::validate() const {
  if (!(bank_capacity_wh > 0.0) || !(backup_capacity_wh > 0.0)) {
    throw InvalidArgumentError("battery capacities must be > 0");
  }
  if (packs < 1) throw InvalidArgumentError("need at least one pack");
  if (!(draw_w >= 0.0) || !(backup_draw_w >= 0.0)) throw InvalidArgumentError("draws must be >= 0");
  if (!(backup_floor >= 0.0 && backup_floor <= 1.0)) {
    throw InvalidArgumentError("backup floor must be in [0, 1]");
  }
}

PowerSystem::PowerSystem(const PowerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const double each = cfg_.bank_capacity_wh / cfg_.packs;
  packs_.assign(static_cast<std::size_t>(cfg_.packs), BatteryPack{each, 1.0, 0.0, false});
  backup_ = BatteryPack{cfg_.backup_capacity_wh, 1.0, cfg_.backup_floor, false};
}

void PowerSystem::step(double dt_s) {
  const double share = cfg_.draw_w / cfg_.packs;
  for (auto& p : packs_) {
    const double before = p.soc;
    p = battery_step(p, share, dt_s);
    energy_wh_ += (before - p.soc) * p.capacity_wh;
  }
  const double before = backup_.soc;
  backup_ = battery_step(backup_, cfg_.backup_draw_w, dt_s);
  energy_wh_ += (before - backup_.soc) * backup_.capacity_wh;
}

bool PowerSystem::depleted() const {
  return std::any_of(packs_.begin(), packs_.end(), [](const BatteryPack& p) { return p.depleted; });
}

EnduranceTrace endurance_trace(const PowerConfig& cfg, int duration_min, double step_s) {
  if (duration_min < 0) throw InvalidArgumentError("duration must be >= 0");
  if (!(step_s > 0.0) || std::fmod(60.0, step_s) != 0.0) {
    throw InvalidArgumentError("step must divide one minute");
  }
  PowerSystem power(cfg);
  EnduranceTrace trace;
  auto row = [&](int minute) {
    EnduranceRow r;
    r.minute = minute;
    for (const auto& p : power.packs()) r.pack_soc.push_back(p.soc);
    r.backup_soc = power.backup().soc;
    trace.rows.push_back(std::move(r));
  };
  row(0);
  const auto steps_per_min = static_cast<long>(std::lround(60.0 / step_s));
  for (int minute = 1; minute <= duration_min; ++minute) {
    for (long k = 1; k <= steps_per_min; ++k) {
      power.step(step_s);
      if (power.depleted()) {
        trace.depletion_min = (minute - 1) + static_cast<double>(k) / static_cast<double>(steps_per_min);
        row(minute);
        return trace;
      }
    }
    row(minute);
  }
  return trace;
}

}  // namespace marsupial::mission
