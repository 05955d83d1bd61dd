#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhmc.h"

/* command-line front end; all real work happens behind the C API */

namespace {

using nlohmann::json;

[[noreturn]] void die_parse(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    std::exit(RHMC_ERROR_PARSE);
}

int bail(rhmc_status rc) {
    std::fprintf(stderr, "error: %s\n", rhmc_last_error());
    return (int)rc;
}

bool parse_double(const std::string& s, double& v) {
    try {
        size_t pos = 0;
        v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) pos++;
        return pos == s.size() && std::isfinite(v);
    } catch (...) {
        return false;
    }
}

/* "re,im" or plain "re" */
void parse_complex(const std::string& s, const char* what, double& re, double& im) {
    size_t comma = s.find(',');
    bool ok = comma == std::string::npos
                  ? (im = 0.0, parse_double(s, re))
                  : parse_double(s.substr(0, comma), re) && parse_double(s.substr(comma + 1), im);
    if (!ok) die_parse(std::string(what) + ": expected a complex number as \"re,im\" or \"re\", got \"" + s + "\"");
}

/* semicolon-separated complex numbers */
json parse_points(const std::string& s) {
    json pts = json::array();
    size_t start = 0;
    while (start <= s.size()) {
        size_t semi = s.find(';', start);
        std::string item = s.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
        double re, im;
        parse_complex(item, "--points", re, im);
        pts.push_back(json::array({re, im}));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return pts;
}

/* everything a subcommand may carry; unset sentinels keep library defaults */
struct Ctx {
    std::string input, target, output;
    std::string lambda_s, nu_s, points_s;
    std::vector<std::string> extras;
    long long seed = -1;
    int restarts = -1;
    double tol_rank = -1, tol_cluster = -1, tol_conj = -1;
    bool quiet = false;
};

std::string build_options(const Ctx& c, bool with_points) {
    json o = json::object();
    if (c.tol_rank > 0) o["rank_rel_tol"] = c.tol_rank;
    if (c.tol_cluster > 0) o["eig_cluster_tol"] = c.tol_cluster;
    if (c.tol_conj > 0) o["conj_tol"] = c.tol_conj;
    if (c.seed >= 0) o["seed"] = c.seed;
    if (c.restarts > 0) o["restarts"] = c.restarts;
    if (!c.extras.empty()) {
        json ex = json::array();
        for (const std::string& s : c.extras) {
            double re, im;
            parse_complex(s, "--lambda-extra", re, im);
            ex.push_back(json::array({re, im}));
        }
        o["lambda_extras"] = ex;
    }
    if (with_points && !c.points_s.empty()) o["points"] = parse_points(c.points_s);
    return o.empty() ? std::string() : o.dump();
}

const char* opts_ptr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

/* result document to --output or stdout; side report to the other stream */
int finish_doc(rhmc_tuple* doc, char* report, const Ctx& c) {
    int rc = 0;
    if (!c.output.empty()) {
        if (auto st = rhmc_tuple_save(doc, c.output.c_str()))
            rc = bail(st);
        else if (!c.quiet && report)
            std::fputs(report, stdout);
    } else {
        char* text = nullptr;
        if (auto st = rhmc_tuple_emit(doc, &text)) {
            rc = bail(st);
        } else {
            std::fputs(text, stdout);
            rhmc_string_free(text);
            if (!c.quiet && report) std::fputs(report, stderr);
        }
    }
    rhmc_string_free(report);
    rhmc_tuple_free(doc);
    return rc;
}

/* report-only commands: the report is the result document */
int finish_text(const std::string& text, const Ctx& c) {
    if (c.output.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream out(c.output);
    out << text;
    if (!out) die_parse("cannot write '" + c.output + "'");
    return 0;
}

void add_tolerance_flags(CLI::App* cmd, Ctx& c) {
    cmd->add_option("--tol-rank", c.tol_rank, "relative rank cutoff (default 1e-10)")
        ->envname("RHMC_TOL_RANK");
    cmd->add_option("--tol-cluster", c.tol_cluster, "eigenvalue clustering radius (default 1e-8)")
        ->envname("RHMC_TOL_CLUSTER");
    cmd->add_option("--tol-conj", c.tol_conj, "conjugation match tolerance (default 1e-8)")
        ->envname("RHMC_TOL_CONJ");
}

void add_output_flag(CLI::App* cmd, Ctx& c) {
    cmd->add_option("-o,--output", c.output, "write the result document here instead of stdout")
        ->envname("RHMC_OUTPUT");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"construct and inspect Fuchsian systems via middle convolution"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rhmc 1.0");
    app.footer("exit codes: 0 ok, 2 parse, 3 precondition, 4 no lambda found,\n"
               "            5 theorem conditions fail, 6 verification fail, 7 integration");

    Ctx c;

    CLI::App* mc_mult = app.add_subcommand("mc-mult", "multiplicative middle convolution of a monodromy tuple");
    mc_mult->add_option("input", c.input, "tuple file, role monodromy")->required();
    mc_mult->add_option("--lambda", c.lambda_s, "spectral parameter, \"re,im\" or \"re\"")
        ->required()->envname("RHMC_LAMBDA");
    mc_mult->add_flag("-q,--quiet", c.quiet, "suppress the side report");
    add_tolerance_flags(mc_mult, c);
    add_output_flag(mc_mult, c);

    CLI::App* mc_add = app.add_subcommand("mc-add", "additive middle convolution of a residue tuple");
    mc_add->add_option("input", c.input, "tuple file, role residue")->required();
    mc_add->add_option("--nu", c.nu_s, "shift parameter, \"re,im\" or \"re\"")
        ->required()->envname("RHMC_NU");
    mc_add->add_flag("-q,--quiet", c.quiet, "suppress the side report");
    add_tolerance_flags(mc_add, c);
    add_output_flag(mc_add, c);

    CLI::App* dim = app.add_subcommand("dim", "predicted quotient dimension at lambda");
    dim->add_option("input", c.input, "tuple file, role monodromy")->required();
    dim->add_option("--lambda", c.lambda_s, "spectral parameter, \"re,im\" or \"re\"")
        ->required()->envname("RHMC_LAMBDA");
    add_tolerance_flags(dim, c);
    add_output_flag(dim, c);

    CLI::App* conditions = app.add_subcommand("conditions", "kernel intersection conditions of a tuple");
    conditions->add_option("input", c.input, "tuple file")->required();
    add_tolerance_flags(conditions, c);
    add_output_flag(conditions, c);

    CLI::App* solve = app.add_subcommand("solve", "construct a Fuchsian system with the given monodromy");
    solve->add_option("input", c.input, "tuple file, role monodromy")->required();
    solve->add_option("--points", c.points_s, "singular points, semicolon-separated complex numbers")
        ->envname("RHMC_POINTS");
    solve->add_option("--lambda-extra", c.extras, "extra lambda candidate, repeatable")
        ->envname("RHMC_LAMBDA_EXTRA");
    solve->add_option("--seed", c.seed, "seed for the randomized residue search")->envname("RHMC_SEED");
    solve->add_option("--restarts", c.restarts, "restart budget for the residue search")
        ->envname("RHMC_RESTARTS");
    solve->add_flag("-q,--quiet", c.quiet, "suppress the trace");
    add_tolerance_flags(solve, c);
    add_output_flag(solve, c);

    CLI::App* monodromy = app.add_subcommand("monodromy", "monodromy tuple of a system along the standard loops");
    monodromy->add_option("input", c.input, "system file, role residue with points")->required();
    monodromy->add_option("--points", c.points_s, "override the points in the file")->envname("RHMC_POINTS");
    monodromy->add_flag("-q,--quiet", c.quiet, "suppress the side report");
    add_tolerance_flags(monodromy, c);
    add_output_flag(monodromy, c);

    CLI::App* verify = app.add_subcommand("verify", "check a system against a target monodromy tuple");
    verify->add_option("system", c.input, "system file, role residue with points")->required();
    verify->add_option("target", c.target, "tuple file, role monodromy")->required();
    verify->add_option("--points", c.points_s, "override the points in the system file")->envname("RHMC_POINTS");
    add_tolerance_flags(verify, c);
    add_output_flag(verify, c);

    CLI::App* jordan = app.add_subcommand("predict-jordan", "Jordan structures after convolution at lambda");
    jordan->add_option("input", c.input, "tuple file, role monodromy")->required();
    jordan->add_option("--lambda", c.lambda_s, "spectral parameter, \"re,im\" or \"re\"")
        ->required()->envname("RHMC_LAMBDA");
    add_tolerance_flags(jordan, c);
    add_output_flag(jordan, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : RHMC_ERROR_PARSE;
    }

    rhmc_tuple* in = nullptr;
    if (auto rc = rhmc_tuple_load(c.input.c_str(), &in)) return bail(rc);

    int ret = 0;
    if (app.got_subcommand(mc_mult) || app.got_subcommand(mc_add)) {
        bool mult = app.got_subcommand(mc_mult);
        double re, im;
        parse_complex(mult ? c.lambda_s : c.nu_s, mult ? "--lambda" : "--nu", re, im);
        std::string opts = build_options(c, false);
        rhmc_tuple* out = nullptr;
        char* report = nullptr;
        auto rc = mult ? rhmc_mc_mult(in, re, im, opts_ptr(opts), &out, &report)
                       : rhmc_mc_add(in, re, im, opts_ptr(opts), &out, &report);
        ret = rc ? bail(rc) : finish_doc(out, report, c);
    } else if (app.got_subcommand(dim)) {
        double re, im;
        parse_complex(c.lambda_s, "--lambda", re, im);
        std::string opts = build_options(c, false);
        int m = 0;
        auto rc = rhmc_predicted_dim(in, re, im, opts_ptr(opts), &m);
        ret = rc ? bail(rc) : finish_text(std::to_string(m) + "\n", c);
    } else if (app.got_subcommand(conditions)) {
        std::string opts = build_options(c, false);
        char* report = nullptr;
        auto rc = rhmc_check_conditions(in, opts_ptr(opts), &report);
        if (rc) {
            ret = bail(rc);
        } else {
            ret = finish_text(report, c);
            rhmc_string_free(report);
        }
    } else if (app.got_subcommand(solve)) {
        std::string opts = build_options(c, true);
        rhmc_tuple* out = nullptr;
        char* trace = nullptr;
        auto rc = rhmc_solve(in, opts_ptr(opts), &out, &trace);
        ret = rc ? bail(rc) : finish_doc(out, trace, c);
    } else if (app.got_subcommand(monodromy)) {
        std::string opts = build_options(c, true);
        rhmc_tuple* out = nullptr;
        char* report = nullptr;
        auto rc = rhmc_monodromy(in, opts_ptr(opts), &out, &report);
        ret = rc ? bail(rc) : finish_doc(out, report, c);
    } else if (app.got_subcommand(verify)) {
        rhmc_tuple* tgt = nullptr;
        if (auto rc = rhmc_tuple_load(c.target.c_str(), &tgt)) {
            rhmc_tuple_free(in);
            return bail(rc);
        }
        std::string opts = build_options(c, true);
        char* report = nullptr;
        auto rc = rhmc_verify(in, tgt, opts_ptr(opts), &report);
        if (report) {
            finish_text(report, c);
            rhmc_string_free(report);
        }
        ret = rc ? bail(rc) : 0;
        rhmc_tuple_free(tgt);
    } else if (app.got_subcommand(jordan)) {
        double re, im;
        parse_complex(c.lambda_s, "--lambda", re, im);
        std::string opts = build_options(c, false);
        char* report = nullptr;
        auto rc = rhmc_predict_jordan(in, re, im, opts_ptr(opts), &report);
        if (rc) {
            ret = bail(rc);
        } else {
            ret = finish_text(report, c);
            rhmc_string_free(report);
        }
    }

    rhmc_tuple_free(in);
    return ret;
}
