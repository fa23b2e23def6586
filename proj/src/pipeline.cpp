#include "ipc/pipeline.hpp"

#include "ipc/factor_selection.hpp"
#include "ipc/init_estimator.hpp"

namespace ipc {

IpcFit fit_ipc(const PanelDataset& data, const IpcConfig& config) {
  validate(data, config);
  const InitResult init = fit_initial(data, config);
  const std::vector<FactorGroup> groups = iterate_groups(data, init, config);
  return fit_final(data, init, groups, config.delta);
}

}  // namespace ipc
