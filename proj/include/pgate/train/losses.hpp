#pragma once

#include "pgate/data/dataset.hpp"
#include "pgate/diff/ops.hpp"

#include <span>

namespace pgate::train {

// Mean relative squared error over cascades: (1/M) sum ((n_hat - n) / n)^2.
double loss_cascade(std::span<const double> predicted, std::span<const double> truth);
diff::Var loss_cascade(std::span<const diff::Var> predicted, std::span<const double> truth);

// (1/|V|) sum_v ||(q_hat_v - q_v) / q_v||^2 with q_hat as an N x 5 matrix.
double loss_personality(const diff::Tensor& predicted, std::span<const data::Personality> truth);
diff::Var loss_personality(diff::Var predicted, std::span<const data::Personality> truth);

double loss_total(double cascade, double personality, double lambda);
diff::Var loss_total(diff::Var cascade, diff::Var personality, double lambda);

// Truth as an N x 5 tensor.
diff::Tensor personality_matrix(std::span<const data::Personality> people);

} // namespace pgate::train
