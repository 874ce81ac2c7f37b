#include "projem/path_engine.hpp"

#include "projem/errors.hpp"

#include <cmath>
#include <string>

namespace projem {

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * c[0];
        const std::uint64_t p1 = std::uint64_t(M1) * c[2];
        c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

double normal_quantile(double p) {
    static constexpr double a[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                    1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                    4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                    3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[8] = {1.0,
                                    4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                    5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                    3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                    5.2264952788528545610e+3};
    static constexpr double c[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                    5.76949722146069140550e0,  3.64784832476320460504e0,
                                    1.27045825245236838258e0,  2.41780725177450611770e-1,
                                    2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {1.0,
                                    2.05319162663775882187e0,  1.67638483018380384940e0,
                                    6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                    1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                    1.05075007164441684324e-9};
    static constexpr double e[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                    1.78482653991729133580e0,  2.96560571828504891230e-1,
                                    2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                    2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {1.0,
                                    5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                    1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                    1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                    2.04426310338993978564e-15};
    auto poly = [](const double* coef, double x) {
        double acc = coef[7];
        for (int i = 6; i >= 0; --i) acc = acc * x + coef[i];
        return acc;
    };

    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / poly(b, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = poly(c, r) / poly(d, r);
    } else {
        r -= 5.0;
        value = poly(e, r) / poly(f, r);
    }
    return q < 0.0 ? -value : value;
}

void BrownianFabric::normals(StreamAddress address, std::span<double> out) const {
    if (address.factor >= 256u || address.level >= (1u << 24)) {
        throw DomainError("stream address out of range");
    }
    const PhiloxKey key = {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
    const std::uint32_t tag = (address.level << 8) | address.factor;
    const std::uint32_t path_lo = std::uint32_t(address.path);
    const std::uint32_t path_hi = std::uint32_t(address.path >> 32);
    const std::size_t n = out.size();
    for (std::size_t i = 0, block = 0; i < n; i += 4, ++block) {
        const PhiloxCounter words =
            philox4x32({std::uint32_t(block), tag, path_lo, path_hi}, key);
        const std::size_t take = std::min<std::size_t>(4, n - i);
        for (std::size_t j = 0; j < take; ++j) out[i + j] = normal_quantile(unit_open(words[j]));
    }
}

void BrownianFabric::increments(StreamAddress address, double h, std::span<double> out) const {
    if (!(h > 0.0)) throw DomainError("increment step must be positive");
    normals(address, out);
    const double scale = std::sqrt(h);
    for (double& x : out) x *= scale;
}

std::vector<double> BrownianFabric::increments(StreamAddress address, std::size_t n,
                                               double h) const {
    if (n < 1) throw DomainError("increment count must be at least 1");
    std::vector<double> out(n);
    increments(address, h, out);
    return out;
}

void couple_levels(std::span<const double> fine, std::size_t refinement,
                   std::span<double> coarse) {
    if (refinement < 1 || fine.size() % refinement != 0 ||
        coarse.size() != fine.size() / refinement) {
        throw LengthMismatch("fine length " + std::to_string(fine.size()) +
                             " is incompatible with refinement " + std::to_string(refinement));
    }
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        double sum = fine[i * refinement];
        for (std::size_t j = 1; j < refinement; ++j) sum += fine[i * refinement + j];
        coarse[i] = sum;
    }
}

std::vector<double> couple_levels(std::span<const double> fine, std::size_t refinement) {
    if (refinement < 1 || fine.size() % refinement != 0) {
        throw LengthMismatch("fine length " + std::to_string(fine.size()) +
                             " is not divisible by " + std::to_string(refinement));
    }
    std::vector<double> coarse(fine.size() / refinement);
    couple_levels(fine, refinement, coarse);
    return coarse;
}

void correlate(std::span<const double> w, std::span<const double> w_perp, double rho,
               std::span<double> z) {
    if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
    if (w.size() != w_perp.size() || z.size() != w.size()) {
        throw LengthMismatch("correlated streams must have equal lengths");
    }
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < w.size(); ++i) z[i] = rho * w[i] + rho_perp * w_perp[i];
}

std::vector<double> correlate(std::span<const double> w, std::span<const double> w_perp,
                              double rho) {
    std::vector<double> z(w.size());
    correlate(w, w_perp, rho, z);
    return z;
}

}  // namespace projem
