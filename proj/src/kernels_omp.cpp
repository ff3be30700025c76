#include "gainqe/kernels.hpp"
#include "kernels_impl.hpp"

namespace gainqe::kernels {

std::vector<CMat> resolvent_omp(const ResolventProblem& p, std::span<const double> deltas) {
    std::vector<CMat> out(deltas.size());
    const auto n = static_cast<long>(deltas.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) detail::resolvent_point(p, deltas[k], out[k]);
    return out;
}

CMat filon_omp(std::span<const FilonSegment> segs, std::span<const double> deltas) {
    CMat out(static_cast<Eigen::Index>(deltas.size()), segs.empty() ? 0 : segs.front().g.cols());
    const auto n = static_cast<long>(deltas.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) out.row(k) = detail::filon_point(segs, deltas[k]);
    return out;
}

std::vector<RateSet> rate_sweep_omp(const QnmModel& model, std::span<const double> omegas) {
    model.validate();
    std::vector<RateSet> out(omegas.size());
    const auto n = static_cast<long>(omegas.size());
    bool failed = false;
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        try {
            out[k] = rates_at(omegas[k], model);
        } catch (...) {
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) throw ValidationError("rate sweep needs omega > 0 at every grid point");
    return out;
}

}  // namespace gainqe::kernels
