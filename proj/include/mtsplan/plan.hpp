#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtsplan/geometry.hpp"
#include "mtsplan/scene.hpp"

namespace mtsplan {

/// Meta-atom layout of one panel. Atoms are indexed row-major (r * cols + c); rows stack
/// vertically and therefore share a plan-view position.
struct MtsSpec {
  int rows = 21;
  int cols = 14;
  double spacing = 0.06;  ///< meters between adjacent atom centers
  /// Per-atom amplitude coupling; nullopt selects the aperture default (atom_coupling).
  std::optional<double> kappa;

  int atoms() const { return rows * cols; }
  double extent() const { return cols * spacing; }
};

/// Effective coupling: spec.kappa if set, else sqrt(4π)·spacing/λ.
double atom_coupling(const MtsSpec& spec, double wavelength);

/// A panel mounted flush on a wall, reflecting into the half-plane of `normal`.
struct MtsPose {
  Vec2 center;
  std::size_t wall;
  double t;       ///< parameter of `center` on the host wall
  Vec2 tangent;   ///< unit, along wall a->b
  Vec2 normal;    ///< unit, toward the served side
  double extent;  ///< meters occupied along the wall

  /// Plan-view position of atom column c.
  Vec2 column_position(int c, const MtsSpec& spec) const {
    return center + tangent * ((c - 0.5 * (spec.cols - 1)) * spec.spacing);
  }
};

struct MtsDeployment {
  MtsPose pose;
  int cluster;                   ///< id within the clustering that produced this plan
  Vec2 beam_target;              ///< cluster centroid used for the virtual phase configuration
  std::vector<CellIndex> members;
};

struct DeploymentPlan {
  MtsSpec spec;
  std::vector<MtsDeployment> panels;

  std::size_t mts_count() const { return panels.size(); }
  std::size_t total_atoms() const { return panels.size() * static_cast<std::size_t>(spec.atoms()); }
};

/// One bit per atom over all panels, panel-major; bit 1 means phase π, bit 0 phase 0.
struct PhaseVector {
  std::vector<std::uint8_t> bits;

  PhaseVector() = default;
  explicit PhaseVector(std::size_t n) : bits(n, 0) {}
  explicit PhaseVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

  std::size_t size() const { return bits.size(); }
  bool operator==(const PhaseVector&) const = default;
};

/// Hex bitstring: bits taken four at a time from index 0, first bit as the nibble's MSB,
/// the final nibble zero-padded. (π,0,π,0) encodes as "a".
std::string to_hex(const PhaseVector& phases);
/// Inverse of to_hex for a known bit count. Throws ParseError on malformed text.
PhaseVector phases_from_hex(const std::string& hex, std::size_t n_bits);

}  // namespace mtsplan
