#pragma once

#include <string>

#include <json.hpp>

#include "opequiv/canonical.hpp"
#include "opequiv/cardinal.hpp"
#include "opequiv/measure.hpp"
#include "opequiv/operator.hpp"
#include "opequiv/shift.hpp"

namespace opequiv::io {

using Json = nlohmann::ordered_json;

// Everything below throws ParseError on malformed input, naming the bad key
// or construct. Unknown keys are rejected rather than ignored.

Json to_json(const Cardinal& c);
Cardinal cardinal_from_json(const Json& j);

Json to_json(const GridSpec& g);

// Tails carry "start" only when their first index is not 0 and "grids" only
// when they have been snapped.
Json to_json(const SpectralMeasure& m);
SpectralMeasure measure_from_json(const Json& j);

Json to_json(const DenseOperator& T);
DenseOperator matrix_from_json(const Json& j);

Json to_json(const ShiftWitness& w);
Json to_json(const ShiftStep& s);
Json to_json(const TailClass& c);
Json to_json(const EviSequence& e);
Json to_json(const CanonicalForm& f);
Json to_json(const Canonicalization& c);
Json to_json(const Violation& v);

// Certificates are printed with a concrete violation for each K in
// kInstanceKs, searched on the inputs of the comparison.
Json to_json(const Verdict& v, const SpectralMeasure& m1, const SpectralMeasure& m2);

inline constexpr double kInstanceKs[] = {2.0, 4.0, 8.0, 16.0};

Json parse(const std::string& text);
Json read_file(const std::string& path);

// Compact form, one line, no trailing newline.
std::string dump(const Json& j);

}  // namespace opequiv::io
