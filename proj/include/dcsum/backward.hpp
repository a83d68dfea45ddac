// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dcsum/forward.hpp"

namespace dcsum {

// Reverse-mode gradients through the deployed path (KB trace -> active column
// with adapters -> head). Accumulates (+=) into `grads`, a zeros_like clone:
// active column, adapter, and head tensors receive gradients; the KB trace is
// treated as constant input, so KB tensors stay untouched.
// `dlogits` holds dLoss/dlogit per sentence (callers fold in batch scaling).
void ac_path_backward(const EncodedDocument& doc, const DualColumnModel& model,
                      const AcPathCache& cache, const Eigen::VectorXd& dlogits,
                      DualColumnModel& grads);

// Same for the student path (KB column alone -> head): gradients land in the
// KB column and head tensors.
void kb_path_backward(const EncodedDocument& doc, const DualColumnModel& model,
                      const KbPathCache& cache, const Eigen::VectorXd& dlogits,
                      DualColumnModel& grads);

}  // namespace dcsum
