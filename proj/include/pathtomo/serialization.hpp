#pragma once
// JSON and CSV persistence.
//
// Non-finite doubles (infinite standard errors) are written as JSON null and
// read back as +inf.

#include <string>

#include <json.hpp>

#include "pathtomo/acquisition.hpp"
#include "pathtomo/interferometer.hpp"
#include "pathtomo/qcore.hpp"
#include "pathtomo/reconstruct.hpp"
#include "pathtomo/states.hpp"

namespace pathtomo {

using Json = nlohmann::ordered_json;

/// {"rows", "cols", "re": [[...]], "im": [[...]]}
Json to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const Json& j);

/// Matrix fields plus "basis_labels".
Json to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const Json& j);

Json to_json(const IdlerStateParams& p);
IdlerStateParams idler_params_from_json(const Json& j);

/// T_H / T_V are written as {"re", "im"}; a bare number is accepted on input.
/// Missing fields fall back to the balanced arrangement with |T| = 1 and a |H>
/// idler; missing coherences default to the idler purity.
Json to_json(const InterferometerConfig& cfg);
InterferometerConfig config_from_json(const Json& j);

Json to_json(const ScanRecord& rec);
ScanRecord scan_record_from_json(const Json& j);

/// "# setting=<H|V> seed=<u64> n=<int>" then "phi_rad,counts_fringe,counts_const".
std::string scan_record_to_csv(const ScanRecord& rec);
ScanRecord scan_record_from_csv(const std::string& text);

Json to_json(const ReconstructionResult& r);
ReconstructionResult reconstruction_result_from_json(const Json& j);

struct CalibrationEstimate {
  double t_h = 1.0;
  double t_v = 1.0;
  double t_h_stderr = 0.0;
  double t_v_stderr = 0.0;
};

/// {"t_h", "t_v", "stderr": {"t_h", "t_v"}}
Json to_json(const CalibrationEstimate& c);
CalibrationEstimate calibration_from_json(const Json& j);
CalibrationEstimate calibration_estimate(const CalibrationResult& c);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
Json read_json_file(const std::string& path);

}  // namespace pathtomo
