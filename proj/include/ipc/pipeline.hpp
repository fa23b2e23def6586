#pragma once

#include "ipc/final_estimator.hpp"
#include "ipc/model.hpp"

namespace ipc {

/// Runs Steps 1-3: validation, initial ALS fit, group extraction and the
/// final slope estimate.
IpcFit fit_ipc(const PanelDataset& data, const IpcConfig& config);

}  // namespace ipc
