#pragma once

#include "westervelt/fe.hpp"

#include <memory>
#include <vector>

namespace westervelt {

/// Energies of one time level, evaluated with the mass and stiffness forms.
struct EnergySample {
    double t = 0.0;
    double e0 = 0.0;         // ||u_ht||^2 + ||grad u_h||^2
    double e1 = 0.0;         // ||u_htt||^2 + ||grad u_ht||^2
    double min_coeff = 1.0;  // min over nodes of 1 + k u_h
    double max_coeff = 1.0;
};

struct StepRecord {
    double t = 0.0;
    EnergySample energy;
    double l2_d = 0.0;             // ||u_h(t)||_{L2}
    double discrete_energy = 0.0;  // 1/2 v'Mv + 1/2 c^2 d'Kd
    int fp_iterations = 0;
};

/// Displacement, velocity and acceleration coefficients at one time level.
struct FieldsAt {
    double t = 0.0;
    std::vector<double> d, v, a;
};

struct Trajectory {
    std::shared_ptr<const FeSpace> space;
    double dt = 0.0;
    std::vector<StepRecord> records;  // one per time level, t_0 included
    std::vector<FieldsAt> fields;     // every level when kept, else empty
    std::vector<FieldsAt> snapshots;  // levels nearest to the requested snapshot times

    [[nodiscard]] std::size_t levels() const { return records.size(); }
};

}  // namespace westervelt
