#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tactictraj/rng.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

/// beta_t / alpha_t / alpha_bar_t tables. alpha_bar is built by running
/// product so the consistency identity alpha_bar_t = alpha_bar_{t-1} * alpha_t
/// holds exactly in floating point.
struct NoiseSchedule {
    std::size_t t_steps = 100;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;

    static NoiseSchedule linear(std::size_t t_steps = 100, double beta_min = 1e-4,
                                double beta_max = 0.05) {
        NoiseSchedule s;
        s.t_steps = t_steps;
        s.beta.resize(t_steps);
        for (std::size_t t = 0; t < t_steps; ++t) {
            const double frac = t_steps == 1 ? 0.0
                                             : static_cast<double>(t) /
                                                   static_cast<double>(t_steps - 1);
            s.beta[t] = beta_min + (beta_max - beta_min) * frac;
        }
        s.finalize();
        return s;
    }

    static NoiseSchedule from_betas(std::vector<double> betas) {
        NoiseSchedule s;
        s.t_steps = betas.size();
        s.beta = std::move(betas);
        s.finalize();
        return s;
    }

    void finalize() {
        if (beta.empty()) throw ArgumentError("noise schedule needs at least one step");
        alpha.resize(t_steps);
        alpha_bar.resize(t_steps);
        double prod = 1.0;
        for (std::size_t t = 0; t < t_steps; ++t) {
            // beta == 0 is allowed for degenerate no-noise schedules.
            if (!(beta[t] >= 0.0 && beta[t] < 1.0)) {
                throw ArgumentError("beta_t must lie in [0, 1), got " + std::to_string(beta[t]));
            }
            alpha[t] = 1.0 - beta[t];
            prod *= alpha[t];
            alpha_bar[t] = prod;
        }
    }

    void check_step(long t) const {
        if (t < 0 || t >= static_cast<long>(t_steps)) {
            throw ArgumentError("diffusion step " + std::to_string(t) + " outside [0, " +
                                std::to_string(t_steps) + ")");
        }
    }
};

/// Closed-form forward diffusion: y_t = sqrt(abar_t) y0 + sqrt(1 - abar_t) z.
/// The t = -1 convention returns y0 unchanged.
inline Tensor forward_diffuse_marginal(const Tensor& y0, long t, const NoiseSchedule& schedule,
                                       SeededRng& rng) {
    if (t == -1) return y0;
    schedule.check_step(t);
    const double abar = schedule.alpha_bar[static_cast<std::size_t>(t)];
    const double a = std::sqrt(abar);
    const double b = std::sqrt(1.0 - abar);
    Tensor out = y0;
    for (double& v : out.data()) v = a * v + b * rng.gaussian();
    return out;
}

/// Same marginal but with the noise supplied by the caller (training reuses z
/// as the regression target).
inline Tensor forward_diffuse_with_noise(const Tensor& y0, long t, const NoiseSchedule& schedule,
                                         const Tensor& z) {
    if (t == -1) return y0;
    schedule.check_step(t);
    if (!y0.same_shape(z)) {
        throw ShapeError("noise shape " + Tensor::shape_string(z.shape()) + " vs y0 " +
                         Tensor::shape_string(y0.shape()));
    }
    const double abar = schedule.alpha_bar[static_cast<std::size_t>(t)];
    const double a = std::sqrt(abar);
    const double b = std::sqrt(1.0 - abar);
    Tensor out = y0;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a * out[i] + b * z[i];
    return out;
}

/// One reverse step with z = 0:
/// y_t = (y_next - (1 - alpha_t)/sqrt(1 - abar_t) eps) / sqrt(alpha_t).
inline Tensor denoise_step_deterministic(const Tensor& y_next, const Tensor& eps_hat, long t,
                                         const NoiseSchedule& schedule) {
    schedule.check_step(t);
    if (!y_next.same_shape(eps_hat)) {
        throw ShapeError("denoise_step eps shape " + Tensor::shape_string(eps_hat.shape()) +
                         " vs y " + Tensor::shape_string(y_next.shape()));
    }
    const std::size_t ti = static_cast<std::size_t>(t);
    const double a = schedule.alpha[ti];
    const double abar = schedule.alpha_bar[ti];
    const double coef = abar < 1.0 ? (1.0 - a) / std::sqrt(1.0 - abar) : 0.0;
    const double inv_sqrt_a = 1.0 / std::sqrt(a);
    Tensor out = y_next;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = inv_sqrt_a * (out[i] - coef * eps_hat[i]);
    return out;
}

/// Reverse step with fresh noise sqrt(1 - alpha_t) z; z is suppressed at the
/// final step t = 0.
inline Tensor denoise_step(const Tensor& y_next, const Tensor& eps_hat, long t,
                           const NoiseSchedule& schedule, SeededRng& rng) {
    Tensor out = denoise_step_deterministic(y_next, eps_hat, t, schedule);
    if (t > 0) {
        const double sigma = std::sqrt(1.0 - schedule.alpha[static_cast<std::size_t>(t)]);
        for (double& v : out.data()) v += sigma * rng.gaussian();
    }
    return out;
}

/// Noise estimator abstraction: (y, condition, timestep) -> eps.
using NoiseEstimator = std::function<Tensor(const Tensor& y, const Tensor& cond, long t)>;

/// Classifier-free guidance blend:
///   eps = f(y, A) + s_g (f(y, G) - f(y, A)).
/// s_g = 0 and s_g = 1 return the respective branch outputs exactly.
inline Tensor guided_noise(const NoiseEstimator& f_eps, const Tensor& y, const Tensor& cond,
                           const Tensor& cond_traj_only, long t, double s_g) {
    if (!std::isfinite(s_g)) throw ArgumentError("guidance scale must be finite");
    if (s_g == 1.0) return f_eps(y, cond, t);
    Tensor uncond = f_eps(y, cond_traj_only, t);
    if (s_g == 0.0) return uncond;
    Tensor cond_out = f_eps(y, cond, t);
    Tensor out = uncond;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += s_g * (cond_out[i] - uncond[i]);
    return out;
}

/// L_dist = min_s ||Y - yhat_s||_2 and
/// L_unc  = (sum_s ||Y - yhat_s||_2) / (sigma_theta^2 S) + log sigma_theta^2.
inline std::pair<double, double> loss_dist_unc(const std::vector<Tensor>& predictions,
                                               const Tensor& truth, double sigma_theta) {
    if (predictions.empty()) throw ArgumentError("loss_dist_unc requires S >= 1 predictions");
    if (!(sigma_theta > 0.0)) {
        throw ArgumentError("sigma_theta must be positive, got " + std::to_string(sigma_theta));
    }
    double min_err = std::numeric_limits<double>::infinity();
    double sum_err = 0.0;
    for (const auto& p : predictions) {
        const double err = frobenius_norm(sub(truth, p));
        min_err = std::min(min_err, err);
        sum_err += err;
    }
    const double sigma2 = sigma_theta * sigma_theta;
    const double l_unc =
        sum_err / (sigma2 * static_cast<double>(predictions.size())) + std::log(sigma2);
    return {min_err, l_unc};
}

}  // namespace tactictraj
