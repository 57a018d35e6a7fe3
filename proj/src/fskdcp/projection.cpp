#include "kancfd/error.hpp"
#include "kancfd/fskdcp.hpp"

#include <string>

namespace kancfd {

KdcpProjection::KdcpProjection(std::size_t d_f, std::size_t groups, int target_task)
    : layer_(target_task, d_f, d_f, groups), target_task_(target_task) {
  for (auto& p : layer_.rbfs()) p = {0.0, 1.0};
}

void KdcpProjection::init_from_features(const Matrix& features, double min_width, double max_width) {
  Rng unused(0);
  layer_.init_from_features(features, unused, 0.0, min_width, max_width);
}

Matrix KdcpProjection::apply(const Matrix& features) const {
  Matrix out = layer_.forward(features);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += features.data()[i];
  return out;
}

std::vector<double> KdcpProjection::apply(std::span<const double> f) const {
  auto out = layer_.forward(f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i];
  return out;
}

std::vector<double> projection_gradient(const KdcpProjection& proj, const Matrix& teacher, const Matrix& student,
                                        double* loss) {
  require(teacher.rows() == student.rows() && teacher.cols() == student.cols(),
          "train_projection_step: teacher and student batches differ in shape");
  const auto align = align_loss(proj.apply(teacher), student);
  if (loss) *loss = align.value;
  return proj.layer().backward(teacher, align.grad).params;
}

double train_projection_step(KdcpProjection& proj, const Matrix& teacher, const Matrix& student, AdamState& opt) {
  double loss = 0.0;
  const auto grad = projection_gradient(proj, teacher, student, &loss);
  auto params = proj.layer().parameters();
  adam_step(params, grad, opt);
  proj.layer().set_parameters(params);
  return loss;
}

FeatureMemory project_memory(const FeatureMemory& mem, const KdcpProjection& proj) {
  if (mem.space_task + 1 != proj.target_task())
    throw ContractViolation("project_memory: memory is in the space of task " + std::to_string(mem.space_task) +
                            " but the projection maps into task " + std::to_string(proj.target_task()));
  FeatureMemory out = mem;
  if (!mem.empty()) out.features = proj.apply(mem.features);
  out.space_task = proj.target_task();
  return out;
}

}  // namespace kancfd
