#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "cotrack/errors.hpp"
#include "cotrack/matrix_utils.hpp"
#include "cotrack/measurement.hpp"

namespace cotrack {

/// Estimated UE state; velocity is present only for motion models that
/// carry it (state dimension 6).
struct UEState {
    Vec3 position = Vec3::Zero();
    std::optional<Vec3> velocity;
};

struct GaussianComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// The PHD intensity as a weighted Gaussian mixture over UE state space.
struct GaussianMixture {
    int time_step = 0;
    std::vector<GaussianComponent> components;

    [[nodiscard]] double total_weight() const {
        double s = 0.0;
        for (const auto& c : components) s += c.weight;
        return s;
    }
    [[nodiscard]] Eigen::Index dim() const {
        return components.empty() ? 0 : components.front().mean.size();
    }
};

enum class MotionKind { random_walk, constant_velocity };

/// Linear transition model; the state dimension is Q's dimension
/// (3 for random walk, 6 for constant velocity).
struct MotionModel {
    MotionKind kind = MotionKind::random_walk;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(3, 3);
    double dt = 1.0;

    [[nodiscard]] Eigen::Index state_dim() const { return Q.rows(); }

    [[nodiscard]] Eigen::MatrixXd transition() const {
        const Eigen::Index n = state_dim();
        Eigen::MatrixXd F = Eigen::MatrixXd::Identity(n, n);
        if (kind == MotionKind::constant_velocity) {
            const Eigen::Index h = n / 2;
            F.topRightCorner(h, h) = dt * Eigen::MatrixXd::Identity(h, h);
        }
        return F;
    }
};

inline void validate_motion_model(const MotionModel& model) {
    if (model.Q.rows() != model.Q.cols())
        throw ValidationError("MotionModel: Q must be square");
    if (!is_psd(model.Q))
        throw ValidationError("MotionModel: Q must be symmetric PSD");
    if (model.kind == MotionKind::constant_velocity && model.Q.rows() % 2 != 0)
        throw ValidationError("MotionModel: constant_velocity needs an even state dimension");
}

/// Detection probability and clutter intensity (spatial density, m^-3).
struct UpdateParams {
    double p_d = 0.9;
    double lambda_c = 0.0;
};

/// Multivariate normal density. A covariance that fails the Cholesky
/// factorization is regularized with +eps*I before evaluation.
inline double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov) {
    const Eigen::Index d = x.size();
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(cov));
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd reg = symmetrized(cov);
        reg.diagonal().array() += kRegularizationEps;
        llt.compute(reg);
        if (llt.info() != Eigen::Success)
            throw ValidationError("gaussian_pdf: covariance not PSD after regularization");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(x - mean);
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const double log_p =
        -0.5 * (w.squaredNorm() + log_det + d * std::log(2.0 * M_PI));
    return std::exp(log_p);
}

/// PHD prediction: weights unchanged, means and covariances pushed through
/// the linear transition.
inline GaussianMixture predict(const GaussianMixture& v, const MotionModel& model) {
    if (!v.components.empty() && v.dim() != model.state_dim())
        throw ValidationError("predict: state dimension mismatch");
    const Eigen::MatrixXd F = model.transition();
    GaussianMixture out;
    out.time_step = v.time_step;
    out.components.reserve(v.components.size());
    for (const auto& c : v.components) {
        GaussianComponent p;
        p.weight = c.weight;
        p.mean = F * c.mean;
        p.cov = symmetrized(F * c.cov * F.transpose() + model.Q);
        out.components.push_back(std::move(p));
    }
    return out;
}

/// PHD measurement update over a set of (z, W) pairs of arbitrary
/// measurement dimension dz <= dx; the measurement matrix is the position
/// selector H = [I_dz | 0]. Output holds the missed-detection copies first,
/// then one corrected component per (measurement, predicted component).
inline GaussianMixture
update_with(const GaussianMixture& v,
            const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& measurements,
            const UpdateParams& params) {
    if (!(params.p_d >= 0.0 && params.p_d <= 1.0))
        throw ValidationError("update: p_d must be in [0, 1]");
    if (!(params.lambda_c >= 0.0))
        throw ValidationError("update: lambda_c must be >= 0");

    const Eigen::Index dx = v.dim();
    const std::size_t nc = v.components.size();

    GaussianMixture out;
    out.time_step = v.time_step;
    if (nc == 0) return out;
    out.components.reserve(nc * (1 + measurements.size()));
    for (const auto& c : v.components) {
        GaussianComponent missed = c;
        missed.weight = (1.0 - params.p_d) * c.weight;
        out.components.push_back(std::move(missed));
    }

    for (const auto& [z, W] : measurements) {
        const Eigen::Index dz = z.size();
        if (dz > dx)
            throw ValidationError("update: measurement dimension exceeds state dimension");

        std::vector<GaussianComponent> corrected(nc);
        double likelihood_mass = 0.0;
        for (std::size_t i = 0; i < nc; ++i) {
            const auto& c = v.components[i];
            const Eigen::VectorXd eta = c.mean.head(dz);
            const Eigen::MatrixXd S = symmetrized(c.cov.topLeftCorner(dz, dz) + W);
            const Eigen::MatrixXd S_inv = invert_spd(S);
            const Eigen::MatrixXd K = c.cov.leftCols(dz) * S_inv;
            GaussianComponent& g = corrected[i];
            g.mean = c.mean + K * (z - eta);
            g.cov = symmetrized(c.cov - K * S * K.transpose());
            g.weight = c.weight * gaussian_pdf(z, eta, S); // scaled below
            likelihood_mass += g.weight;
        }
        const double denom = params.lambda_c + params.p_d * likelihood_mass;
        for (auto& g : corrected) {
            g.weight = denom > 0.0 ? params.p_d * g.weight / denom : 0.0;
            out.components.push_back(std::move(g));
        }
    }
    return out;
}

/// PHD measurement update with position-domain measurements, each carrying
/// its own covariance.
inline GaussianMixture update(const GaussianMixture& v, const MeasurementSet& Z,
                              const UpdateParams& params) {
    std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>> ms;
    ms.reserve(Z.items.size());
    for (const auto& pm : Z.items)
        ms.emplace_back(pm.z, pm.cov);
    GaussianMixture out = update_with(v, ms, params);
    out.time_step = Z.time_step;
    return out;
}

/// Drop components below the weight threshold. Surviving weights are not
/// renormalized.
inline GaussianMixture prune(const GaussianMixture& v, double threshold) {
    if (threshold < 0.0)
        throw ValidationError("prune: threshold must be >= 0");
    GaussianMixture out;
    out.time_step = v.time_step;
    for (const auto& c : v.components)
        if (c.weight >= threshold) out.components.push_back(c);
    return out;
}

namespace detail {

/// One merge pass: highest-weight component absorbs everything within the
/// squared-Mahalanobis threshold (measured in the absorbed component's own
/// covariance), moment-matched into a single Gaussian.
inline std::vector<GaussianComponent>
merge_pass(const std::vector<GaussianComponent>& comps, double threshold) {
    const std::size_t n = comps.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return comps[a].weight > comps[b].weight;
    });
    std::vector<Eigen::MatrixXd> cov_inv(n);
    for (std::size_t i = 0; i < n; ++i) cov_inv[i] = invert_spd(comps[i].cov);

    std::vector<bool> absorbed(n, false);
    std::vector<GaussianComponent> out;
    for (std::size_t lead : order) {
        if (absorbed[lead]) continue;
        absorbed[lead] = true;
        std::vector<std::size_t> cluster{lead};
        for (std::size_t j : order) {
            if (absorbed[j]) continue;
            const Eigen::VectorXd d = comps[j].mean - comps[lead].mean;
            const double dist = d.dot(cov_inv[j] * d);
            if (dist <= threshold) {
                absorbed[j] = true;
                cluster.push_back(j);
            }
        }
        GaussianComponent merged;
        merged.weight = 0.0;
        for (std::size_t j : cluster) merged.weight += comps[j].weight;
        merged.mean = Eigen::VectorXd::Zero(comps[lead].mean.size());
        for (std::size_t j : cluster) merged.mean += comps[j].weight * comps[j].mean;
        merged.mean /= merged.weight;
        merged.cov = Eigen::MatrixXd::Zero(comps[lead].mean.size(), comps[lead].mean.size());
        for (std::size_t j : cluster) {
            const Eigen::VectorXd d = comps[j].mean - merged.mean;
            merged.cov += comps[j].weight * (comps[j].cov + d * d.transpose());
        }
        merged.cov = symmetrized(merged.cov / merged.weight);
        out.push_back(std::move(merged));
    }
    return out;
}

} // namespace detail

/// Moment-matching reduction. Passes repeat until no pair is within the
/// threshold, so the operation is idempotent on its own output; the
/// component count is then capped by keeping the largest weights.
inline GaussianMixture merge(const GaussianMixture& v, double threshold,
                             int max_components = 500) {
    if (!(threshold > 0.0))
        throw ValidationError("merge: threshold must be > 0");
    GaussianMixture out;
    out.time_step = v.time_step;
    out.components = v.components;
    while (true) {
        auto reduced = detail::merge_pass(out.components, threshold);
        const bool done = reduced.size() == out.components.size();
        out.components = std::move(reduced);
        if (done) break;
    }
    if (static_cast<int>(out.components.size()) > max_components) {
        std::stable_sort(out.components.begin(), out.components.end(),
                         [](const auto& a, const auto& b) { return a.weight > b.weight; });
        out.components.resize(max_components);
    }
    return out;
}

/// Component indices ordered by descending weight (ties broken by index),
/// truncated to the M largest.
inline std::vector<std::size_t> extract_indices(const GaussianMixture& v, int m_largest) {
    if (m_largest < 0)
        throw ValidationError("extract_states: M must be >= 0");
    std::vector<std::size_t> order(v.components.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v.components[a].weight > v.components[b].weight;
    });
    order.resize(std::min<std::size_t>(m_largest, order.size()));
    return order;
}

inline UEState state_from_mean(const Eigen::VectorXd& m) {
    UEState s;
    if (m.size() == 3) {
        s.position = m;
    } else if (m.size() == 6) {
        s.position = m.head<3>();
        s.velocity = Vec3(m.tail<3>());
    } else {
        throw ValidationError("extract_states: state dimension must be 3 or 6");
    }
    return s;
}

/// Means of the M highest-weight components, descending weight, ties broken
/// by component index.
inline std::vector<UEState> extract_states(const GaussianMixture& v, int m_largest) {
    std::vector<UEState> out;
    for (std::size_t i : extract_indices(v, m_largest))
        out.push_back(state_from_mean(v.components[i].mean));
    return out;
}

/// Optional measurement-driven birth for time-varying target counts: spawn
/// a low-weight component at every measurement that gates with no predicted
/// component.
struct MeasurementBirthParams {
    double weight = 1e-2;
    Eigen::MatrixXd cov;  // dx x dx
    double gate = 16.0;   // squared Mahalanobis
};

inline GaussianMixture add_measurement_births(const GaussianMixture& updated,
                                              const GaussianMixture& predicted,
                                              const MeasurementSet& Z,
                                              const MeasurementBirthParams& params) {
    GaussianMixture out = updated;
    const Eigen::Index dx = params.cov.rows();
    for (const auto& pm : Z.items) {
        bool associated = false;
        for (const auto& c : predicted.components) {
            const Eigen::VectorXd eta = c.mean.head(3);
            const Eigen::MatrixXd S = symmetrized(c.cov.topLeftCorner(3, 3) + pm.cov);
            const Eigen::VectorXd d = pm.z - eta;
            if (d.dot(invert_spd(S) * d) <= params.gate) {
                associated = true;
                break;
            }
        }
        if (!associated) {
            GaussianComponent birth;
            birth.weight = params.weight;
            birth.mean = Eigen::VectorXd::Zero(dx);
            birth.mean.head(3) = pm.z;
            birth.cov = params.cov;
            out.components.push_back(std::move(birth));
        }
    }
    return out;
}

} // namespace cotrack
