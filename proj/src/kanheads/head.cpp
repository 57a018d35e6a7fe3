#include "kancfd/head.hpp"

#include "kancfd/baseline_heads.hpp"
#include "kancfd/dgkd_head.hpp"
#include "kancfd/error.hpp"

namespace kancfd {

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::dgkd: return "dgkd";
    case HeadKind::mlp: return "mlp";
    case HeadKind::groupkan: return "groupkan";
  }
  return "unknown";
}

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "dgkd") return HeadKind::dgkd;
  if (name == "mlp") return HeadKind::mlp;
  if (name == "groupkan") return HeadKind::groupkan;
  throw ContractViolation("unknown head kind '" + name + "' (expected dgkd, mlp or groupkan)");
}

std::unique_ptr<Head> make_head(HeadKind kind, std::size_t d_in, std::size_t d_out, const HeadOptions& options,
                                Rng& rng) {
  switch (kind) {
    case HeadKind::dgkd: return std::make_unique<DgkdHead>(d_in, d_out, options.groups);
    case HeadKind::mlp: return std::make_unique<MlpHead>(d_in, d_out, options.mlp_hidden, rng);
    case HeadKind::groupkan: return std::make_unique<GroupKanHead>(d_in, d_out, options.groups, rng);
  }
  throw ContractViolation("make_head: unknown kind");
}

}  // namespace kancfd
