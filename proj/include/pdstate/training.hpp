#pragma once

// Per-subject training flow: filter, segment, extract, screen, grid search
// with feature elimination, sigmoid calibration and threshold selection.

#include <cstdint>
#include <string>
#include <vector>

#include "pdstate/calibrate.hpp"
#include "pdstate/featselect.hpp"
#include "pdstate/model.hpp"
#include "pdstate/preprocess.hpp"
#include "pdstate/svm.hpp"
#include "pdstate/types.hpp"

namespace pdstate::training {

struct TrainOptions {
    std::vector<SensorId> sensors;  // empty = every sensor in the recording
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    preprocess::SegmentOptions segment;
};

struct TrainOutput {
    SvmModel model;
    featselect::ScreenResult screen;
    svm::GridSearchResult search;
    calibrate::CvDecisions cv;
    calibrate::PlattFit platt;
    std::size_t windows = 0;
    std::size_t off_windows = 0;
    std::size_t on_windows = 0;
    double training_rejection = 0.0;  // fraction of training windows below the threshold
};

/// Throws with the failing stage in the message.
TrainOutput train_subject(const Recording& recording, const TrainOptions& options = {});

/// Selected features, kernel, c, gamma, A, B, threshold and CV accuracy as JSON.
std::string summary_json(const TrainOutput& out);

}  // namespace pdstate::training
