#pragma once

#include <optional>
#include <string>
#include <vector>

namespace marsupial::mission {

/// Linear-discharge pack. A pack with floor > 0 stops discharging at the
/// floor, which models the onboard backup battery holding once the tether
/// supply takes over.
struct BatteryPack {
  double capacity_wh = 0.0;
  double soc = 1.0;    ///< fraction [0, 1]
  double floor = 0.0;  ///< fraction
  bool depleted = false;
};

/// SOC -= draw * dt / (3600 * capacity), held at the floor and clamped at 0
/// (setting `depleted`). Throws InvalidArgumentError for draw < 0, dt <= 0 or
/// a non-positive capacity.
BatteryPack battery_step(BatteryPack pack, double draw_w, double dt_s);

/// Tether-system power draws, in W.
inline constexpr double kTetherSystemDrawW = 1200.0;  ///< rated draw of the tether system
inline constexpr double kFittedDrawW = 1804.8;        ///< 47% of 3840 Wh in one hour
inline constexpr double kReportedDrawW = 1635.0;      ///< average draw stated for the field run

/// "tether" | "fitted" | "reported"; throws InvalidArgumentError otherwise.
double preset_draw(const std::string& name);

struct PowerConfig {
  double bank_capacity_wh = 3840.0;  ///< total over the parallel packs on the UGV
  int packs = 2;                     ///< identical packs sharing the draw equally
  double draw_w = kTetherSystemDrawW;
  double backup_capacity_wh = 500.0;
  double backup_draw_w = 140.0;
  double backup_floor = 0.86;

  void validate() const;
};

/// UGV pack bank plus the UAV backup battery.
class PowerSystem {
 public:
  explicit PowerSystem(const PowerConfig& cfg);

  void step(double dt_s);
  const std::vector<BatteryPack>& packs() const { return packs_; }
  const BatteryPack& backup() const { return backup_; }
  /// True once any bank pack is empty (the packs share the draw, so they empty together).
  bool depleted() const;
  double energy_wh() const { return energy_wh_; }

 private:
  PowerConfig cfg_;
  std::vector<BatteryPack> packs_;
  BatteryPack backup_;
  double energy_wh_ = 0.0;
};

struct EnduranceRow {
  int minute = 0;
  std::vector<double> pack_soc;  ///< fractions, one per pack
  double backup_soc = 1.0;
};

struct EnduranceTrace {
  std::vector<EnduranceRow> rows;      ///< one per minute, minute 0 included
  std::optional<double> depletion_min;  ///< first time the bank is empty
};

/// Integrates the configured draws at `step_s` for `duration_min` minutes,
/// stopping early at depletion (its row is still emitted).
EnduranceTrace endurance_trace(const PowerConfig& cfg, int duration_min, double step_s = 1.0);

}  // namespace marsupial::mission
