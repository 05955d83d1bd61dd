#pragma once

#include <optional>
#include <string>
#include <vector>

#include "types.hpp"

namespace rhmc {

/* on-disk document: a matrix tuple with its role, optionally carrying the
   singular points that turn a residue tuple into a full system */
struct TupleFile {
    int version = 1;
    MatrixTuple tuple;
    std::optional<std::vector<cplx>> points;
};

/* throws rhmc_error(status::parse) on malformed text, wrong shapes,
   non-finite entries, or duplicate points */
TupleFile parse_tuple_file(const std::string& text);
TupleFile load_tuple_file(const std::string& path);

/* deterministic text; 17 significant digits so parse(emit(x)) == x */
std::string emit_tuple_file(const TupleFile& tf);
void save_tuple_file(const TupleFile& tf, const std::string& path);

/* conversions; system_from_file requires role residue and points present */
TupleFile file_from_tuple(const MatrixTuple& t);
TupleFile file_from_system(const FuchsianSystem& sys);
FuchsianSystem system_from_file(const TupleFile& tf);

}  // namespace rhmc
