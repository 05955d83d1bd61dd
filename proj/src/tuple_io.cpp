#include "tuple_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rhmc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw rhmc_error(status::parse, "tuple file: " + msg);
}

double get_finite(const json& j, const char* what) {
    if (!j.is_number()) fail(std::string(what) + " must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(std::string(what) + " must be finite");
    return v;
}

cplx get_pair(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) fail(std::string(what) + " must be a [re, im] pair");
    return {get_finite(j[0], what), get_finite(j[1], what)};
}

/* shortest of the 17-significant-digit forms that still round-trips; a
   negative zero needs the decimal point or readers take the integer path
   and drop the sign */
std::string num(double v) {
    if (v == 0.0) return std::signbit(v) ? "-0.0" : "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string pair_text(cplx z) { return "[" + num(z.real()) + ", " + num(z.imag()) + "]"; }

}  // namespace

TupleFile parse_tuple_file(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail("not valid JSON");
    if (!doc.is_object()) fail("top level must be an object");

    for (const char* key : {"version", "role", "p", "n", "matrices"})
        if (!doc.contains(key)) fail(std::string("missing field '") + key + "'");

    TupleFile tf;
    if (!doc["version"].is_number_integer()) fail("'version' must be an integer");
    tf.version = doc["version"].get<int>();
    if (tf.version != 1) fail("unsupported version " + std::to_string(tf.version));

    if (!doc["role"].is_string()) fail("'role' must be a string");
    std::string role = doc["role"].get<std::string>();
    if (role == "monodromy")
        tf.tuple.role = TupleRole::monodromy;
    else if (role == "residue")
        tf.tuple.role = TupleRole::residue;
    else
        fail("'role' must be \"monodromy\" or \"residue\"");

    if (!doc["p"].is_number_integer() || !doc["n"].is_number_integer())
        fail("'p' and 'n' must be integers");
    int p = doc["p"].get<int>(), n = doc["n"].get<int>();
    if (p < 0 || n < 0) fail("'p' and 'n' must be nonnegative");

    const json& mats = doc["matrices"];
    if (!mats.is_array() || (int)mats.size() != n) fail("'matrices' must list exactly n matrices");
    for (int k = 0; k < n; k++) {
        const json& jm = mats[k];
        if (!jm.is_array() || (int)jm.size() != p) fail("each matrix must have p rows");
        CMatrix m(p, p);
        for (int i = 0; i < p; i++) {
            if (!jm[i].is_array() || (int)jm[i].size() != p) fail("each matrix row must have p entries");
            for (int j = 0; j < p; j++) m(i, j) = get_pair(jm[i][j], "matrix entry");
        }
        tf.tuple.matrices.push_back(std::move(m));
    }

    if (doc.contains("points")) {
        const json& pts = doc["points"];
        if (!pts.is_array() || (int)pts.size() != n) fail("'points' must list exactly n points");
        std::vector<cplx> points;
        for (const json& jp : pts) points.push_back(get_pair(jp, "point"));
        for (size_t i = 0; i < points.size(); i++)
            for (size_t j = i + 1; j < points.size(); j++)
                if (std::abs(points[i] - points[j]) == 0.0) fail("points must be pairwise distinct");
        tf.points = std::move(points);
    }
    return tf;
}

TupleFile load_tuple_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rhmc_error(status::parse, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tuple_file(buf.str());
}

std::string emit_tuple_file(const TupleFile& tf) {
    const MatrixTuple& t = tf.tuple;
    std::string out;
    out += "{\n";
    out += "  \"version\": " + std::to_string(tf.version) + ",\n";
    out += std::string("  \"role\": \"") + (t.role == TupleRole::monodromy ? "monodromy" : "residue") + "\",\n";
    out += "  \"p\": " + std::to_string(t.p()) + ",\n";
    out += "  \"n\": " + std::to_string(t.n()) + ",\n";
    out += "  \"matrices\": [";
    for (int k = 0; k < t.n(); k++) {
        out += k ? ",\n    [" : "\n    [";
        const CMatrix& m = t.matrices[k];
        for (int i = 0; i < m.rows(); i++) {
            out += i ? ",\n     [" : "\n     [";
            for (int j = 0; j < m.cols(); j++) out += (j ? ", " : "") + pair_text(m(i, j));
            out += "]";
        }
        out += m.rows() ? "\n    ]" : "]";
    }
    out += t.n() ? "\n  ]" : "]";
    if (tf.points) {
        out += ",\n  \"points\": [";
        for (size_t i = 0; i < tf.points->size(); i++)
            out += (i ? ", " : "") + pair_text((*tf.points)[i]);
        out += "]";
    }
    out += "\n}\n";
    return out;
}

void save_tuple_file(const TupleFile& tf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw rhmc_error(status::parse, "cannot open '" + path + "' for writing");
    out << emit_tuple_file(tf);
    if (!out) throw rhmc_error(status::parse, "write to '" + path + "' failed");
}

TupleFile file_from_tuple(const MatrixTuple& t) {
    TupleFile tf;
    tf.tuple = t;
    return tf;
}

TupleFile file_from_system(const FuchsianSystem& sys) {
    TupleFile tf;
    tf.tuple = sys.residues;
    tf.points = sys.points;
    return tf;
}

FuchsianSystem system_from_file(const TupleFile& tf) {
    if (tf.tuple.role != TupleRole::residue)
        throw rhmc_error(status::precondition, "a system file needs role \"residue\"");
    if (!tf.points)
        throw rhmc_error(status::precondition, "a system file needs a \"points\" field");
    FuchsianSystem sys{*tf.points, tf.tuple};
    sys.validate();
    return sys;
}

}  // namespace rhmc
