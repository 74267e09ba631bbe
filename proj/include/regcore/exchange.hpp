#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/corpus.hpp"
#include "regcore/evaluation.hpp"

namespace regcore {

/// Per-document label probabilities shared with external classifiers.
///
///   #labels NA IN OP ID HI IP LY SP
///   #threshold 0.5
///   <id>\t<p1> <p2> ... <p8>
struct PredictionFile {
    double threshold = 0.5;
    std::vector<std::string> ids;
    std::vector<std::array<double, kNumRegisters>> probabilities;

    std::vector<LabelSet> labels() const;
};

class ExchangeError : public std::runtime_error {
public:
    ExchangeError(const std::string& what, std::vector<std::string> ids = {})
        : std::runtime_error(what), ids_(std::move(ids)) {}
    /// Offending document ids, when the error concerns id coverage.
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
};

/// Strict reader: both header lines required, label order must be canonical,
/// probabilities in [0, 1]. Malformed rows raise ParseError with the line number.
PredictionFile read_predictions(std::istream& in);
PredictionFile read_predictions_file(const std::string& path);

void write_predictions(std::ostream& out, const PredictionFile& file);
void write_predictions_file(const std::string& path, const PredictionFile& file);

struct ExternalEvaluation {
    EvalReport report;
    ConfusionMatrix confusion;
};

/// Thresholds the file's probabilities and scores them against `gold`.
/// The prediction ids must cover the gold ids exactly; otherwise an
/// ExchangeError lists the missing and extra ids.
ExternalEvaluation evaluate_external(const PredictionFile& predictions, const Corpus& gold);

}  // namespace regcore
