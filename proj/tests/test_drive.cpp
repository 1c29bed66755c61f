#include <catch2/catch.hpp>

#include "ionpa/ionpa.hpp"
#include "support.hpp"

using namespace ionpa;

TEST_CASE("planar crystal gives zero phases for every gate kind") {
  const auto& c = support::get_crystal(support::penning_planar(19));
  for (const SdfKind kind : {SdfKind::light_shift, SdfKind::ms_phase_insensitive,
                             SdfKind::ms_phase_sensitive}) {
    SDFSpec sdf;
    sdf.kind = kind;
    sdf.delta_k = 2.0 * constants::two_pi / 313.0e-9;
    const auto phases = derive_phases(sdf, c.eq);
    REQUIRE(phases.phi.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("bilayer separation sets the interlayer phase") {
  // synthetic two-plane crystal with separation s and delta_k s = pi/2
  CrystalEquilibrium eq;
  eq.n_ions = 4;
  eq.positions.setZero(12);
  const double s = 8.0e-6;
  eq.positions[2] = s / 2;
  eq.positions[5] = s / 2;
  eq.positions[8] = -s / 2;
  eq.positions[11] = -s / 2;
  SDFSpec sdf;
  sdf.kind = SdfKind::light_shift;
  sdf.delta_k = 0.5 * constants::pi / s;
  const auto phases = derive_phases(sdf, eq);
  REQUIRE(std::abs(phases.phi[0] - phases.phi[2]) ==
          Approx(0.5 * constants::pi).epsilon(1e-12));
}

TEST_CASE("phase-sensitive MS zeroes the working phases, keeps raw") {
  const auto& c = support::get_crystal(support::paul_chain(2));
  SDFSpec sdf;
  sdf.kind = SdfKind::ms_phase_sensitive;
  sdf.delta_k = 4.0e6;
  const auto phases = derive_phases(sdf, c.eq);
  REQUIRE(phases.phi.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(phases.raw_phi.cwiseAbs().maxCoeff() > 0.0);
  REQUIRE(phases.raw_phi[0] == Approx(-sdf.delta_k * c.eq.z(0)));
  REQUIRE(phases.spin_axis == 'x');
}

TEST_CASE("coupling strengths: zero force gives zero coupling") {
  const auto& c = support::get_crystal(support::paul_chain(2));
  SDFSpec sdf;
  sdf.kind = SdfKind::light_shift;
  sdf.strength = 0.0;
  sdf.delta_k = 4.0e6;
  REQUIRE(mode_coupling_strengths(sdf, c.spec).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coupling strengths scale linearly with the zero-point length") {
  const auto& c = support::get_crystal(support::paul_chain(2));
  SDFSpec sdf;
  sdf.kind = SdfKind::ms_phase_sensitive;
  sdf.strength = constants::two_pi * 20.0e3;
  sdf.delta_k = 4.0e6;
  const auto f = mode_coupling_strengths(sdf, c.spec);
  for (int n = 0; n < c.spec.n_modes(); ++n)
    for (int m = 0; m < c.spec.n_modes(); ++m) {
      if (c.spec.zero_point[m] == 0.0) continue;
      REQUIRE(f[n] / f[m] ==
              Approx(c.spec.zero_point[n] / c.spec.zero_point[m]).epsilon(1e-12));
    }
}

TEST_CASE("LS and PS-MS give identical couplings when F0 = hbar Omega dk") {
  const auto& c = support::get_crystal(support::paul_chain(2));
  SDFSpec ms;
  ms.kind = SdfKind::ms_phase_sensitive;
  ms.strength = constants::two_pi * 20.0e3;
  ms.delta_k = 4.0e6;
  SDFSpec ls = ms;
  ls.kind = SdfKind::light_shift;
  ls.strength = constants::hbar * ms.strength * ms.delta_k;
  const auto f_ms = mode_coupling_strengths(ms, c.spec);
  const auto f_ls = mode_coupling_strengths(ls, c.spec);
  REQUIRE((f_ms - f_ls).cwiseAbs().maxCoeff() <= 1e-12 * f_ms.cwiseAbs().maxCoeff());
}

TEST_CASE("gate kinds agree on the RWA coupling for a planar crystal") {
  const auto& c = support::get_crystal(support::penning_planar(19));
  SDFSpec ms;
  ms.kind = SdfKind::ms_phase_sensitive;
  ms.strength = constants::two_pi * 20.0e3;
  ms.delta_k = 4.0e6;
  SDFSpec pims = ms;
  pims.kind = SdfKind::ms_phase_insensitive;
  SDFSpec ls = ms;
  ls.kind = SdfKind::light_shift;
  ls.strength = constants::hbar * ms.strength * ms.delta_k;

  const auto f1 = mode_coupling_strengths(ms, c.spec);
  const auto f2 = mode_coupling_strengths(pims, c.spec);
  const auto f3 = mode_coupling_strengths(ls, c.spec);
  const auto p1 = derive_phases(ms, c.eq);
  const auto p2 = derive_phases(pims, c.eq);
  const auto p3 = derive_phases(ls, c.eq);

  // identical f_n and phi_j = 0 across kinds; only the spin axis differs
  REQUIRE((f1 - f2).cwiseAbs().maxCoeff() < 1e-15 * f1.maxCoeff());
  REQUIRE((f1 - f3).cwiseAbs().maxCoeff() < 1e-12 * f1.maxCoeff());
  REQUIRE(p1.phi.cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE(p2.phi.cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE(p3.phi.cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE(p3.spin_axis == 'z');
  REQUIRE(p1.spin_axis == 'x');
  REQUIRE(p2.spin_axis == 'x');
}

TEST_CASE("lamb-dicke diagnostic is reported") {
  const auto& c = support::get_crystal(support::paul_chain(2));
  SDFSpec sdf;
  sdf.kind = SdfKind::ms_phase_sensitive;
  sdf.delta_k = 4.0e6;
  const double ratio = sdf.lamb_dicke_ratio(c.spec);
  REQUIRE(ratio > 0.0);
  REQUIRE(ratio < 1.0);
}
