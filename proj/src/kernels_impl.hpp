#pragma once

#include "gainqe/kernels.hpp"

namespace gainqe::kernels::detail {

void resolvent_point(const ResolventProblem& p, double delta, CMat& out);
Eigen::RowVectorXcd filon_point(std::span<const FilonSegment> segs, double delta);

}  // namespace gainqe::kernels::detail
