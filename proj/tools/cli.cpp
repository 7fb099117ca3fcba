#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dwitt/dwitt.h"

using nlohmann::json;

namespace {

constexpr const char* budget_env = "DWITT_BUDGET";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep = ',')
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        auto b = cur.find_first_not_of(" \t"), e = cur.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

// "Z[x,y]", "[x,y]" or "x,y" -> ["x", "y"]
std::vector<std::string> ring_variables(const std::string& ring)
{
    auto open = ring.find('[');
    if (open == std::string::npos)
        return split(ring);
    auto close = ring.find(']', open);
    if (close == std::string::npos)
        throw UsageError("unbalanced brackets in ring " + ring);
    return split(ring.substr(open + 1, close - open - 1));
}

// A JSON value given inline or as a file name.
json json_input(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\n");
    if (b != std::string::npos && (s[b] == '{' || s[b] == '['))
        return json::parse(s);
    std::ifstream in(s);
    if (!in)
        throw UsageError("cannot read " + s);
    return json::parse(in);
}

json ints_or_polys(const std::string& s)
{
    json out = json::array();
    for (const auto& t : split(s)) out.push_back(t);
    return out;
}

// Parses "name=value,name=value" into the context budgets.
int apply_budget_env(dwitt_context* ctx)
{
    const char* env = std::getenv(budget_env);
    if (!env)
        return DWITT_OK;
    for (const auto& item : split(env)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            std::cerr << "dwitt: " << budget_env << " entries look like name=value, got " << item << "\n";
            return DWITT_E_USAGE;
        }
        unsigned long v = 0;
        try {
            v = std::stoul(item.substr(eq + 1));
        } catch (const std::exception&) {
            std::cerr << "dwitt: bad number in " << budget_env << ": " << item << "\n";
            return DWITT_E_USAGE;
        }
        int st = dwitt_set_budget(ctx, item.substr(0, eq).c_str(), v);
        if (st != DWITT_OK) {
            std::cerr << "dwitt: " << dwitt_last_error(ctx) << "\n";
            return st;
        }
    }
    return DWITT_OK;
}

struct Leaf {
    std::string op;
    std::function<json()> args;
};

struct Common {
    std::string out;
    std::string format = "text";
    std::string extra;  // raw JSON object merged into the arguments
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--out", c.out, "write the report to a file");
    app->add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    app->add_option("--args", c.extra, "extra JSON arguments (inline or file)");
}

int write_output(const std::string& path, std::string body)
{
    while (!body.empty() && body.back() == '\n')
        body.pop_back();
    if (path.empty()) {
        std::cout << body << "\n";
        return 0;
    }
    std::ofstream f(path);
    if (!f) {
        std::cerr << "dwitt: cannot write " << path << "\n";
        return 2;
    }
    f << body << "\n";
    return 0;
}

int run(const Leaf& leaf, const Common& c)
{
    std::unique_ptr<dwitt_context, decltype(&dwitt_context_free)> ctx(dwitt_context_new(), dwitt_context_free);
    if (!ctx)
        return 1;
    if (int st = apply_budget_env(ctx.get()); st != DWITT_OK)
        return 2;
    json args;
    try {
        args = leaf.args();
        if (!c.extra.empty())
            args.merge_patch(json_input(c.extra));
    } catch (const std::exception& e) {
        std::cerr << "dwitt: " << e.what() << "\n";
        return 2;
    }
    dwitt_result* raw = nullptr;
    int st = dwitt_call(ctx.get(), leaf.op.c_str(), args.dump().c_str(), &raw);
    if (st != DWITT_OK) {
        std::cerr << "dwitt: " << dwitt_status_name(st) << ": " << dwitt_last_error(ctx.get()) << "\n";
        return dwitt_status_is_usage(st) ? 2 : 1;
    }
    std::unique_ptr<dwitt_result, decltype(&dwitt_result_free)> r(raw, dwitt_result_free);
    bool pass = dwitt_result_pass(r.get());
    if (leaf.op == "selftest") {
        std::cerr << dwitt_result_text(r.get());
        if (int rc = write_output(c.out, dwitt_result_json(r.get())))
            return rc;
    } else {
        std::string body = c.format == "json" ? dwitt_result_json(r.get()) : dwitt_result_text(r.get());
        if (int rc = write_output(c.out, body))
            return rc;
    }
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact computations with Witt vectors, Dieudonne complexes and de Rham-Witt complexes", "dwitt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dwitt_version()));
    app.footer(std::string("Budgets: ") + budget_env + "=span_budget=N,adjunction_budget=N,saturation_cap=N");

    Common common;
    Leaf chosen;
    std::vector<std::unique_ptr<Leaf>> leaves;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& op, const std::string& help) {
        auto* sub = parent->add_subcommand(name, help);
        add_common(sub, common);
        leaves.push_back(std::make_unique<Leaf>());
        Leaf* l = leaves.back().get();
        l->op = op;
        sub->callback([&chosen, l] { chosen = *l; });
        return std::make_pair(sub, l);
    };
    auto module = [&](const std::string& name, const std::string& help) {
        auto* m = app.add_subcommand(name, help);
        m->require_subcommand(1);
        return m;
    };

    // Shared option storage; each leaf reads only what it registered.
    unsigned long p = 0;
    unsigned n = 0, degree_bound = 4, trunc = 8, m = 2, r = 1, level = 1, weight_bound = 4, window = 2;
    unsigned precision = 0, headroom = 2, prime_bound = 7, r_max = 0, seed = 1;
    std::string coords, coords_y, vars, modulus, a, ring, lift, matrix, series, series_b, ghost, complex, complex_n;
    std::string target_ring, target_lift, images, poly, route = "direct", orientation = "derived", mat_b;
    bool no_f = false;

    auto witt_vec = [&](bool with_y) {
        json j{{"p", p}, {"x", {{"coords", ints_or_polys(coords)}}}};
        if (n)
            j["n"] = n;
        if (with_y)
            j["y"] = {{"coords", ints_or_polys(coords_y)}};
        if (!vars.empty())
            j["variables"] = split(vars);
        if (!modulus.empty())
            j["modulus"] = std::stol(modulus);
        return j;
    };
    auto ring_json = [&](const std::string& rg, const std::string& lf) {
        json j{{"p", p}, {"variables", ring_variables(rg)}};
        if (!lf.empty())
            j["lift"] = ints_or_polys(lf);
        return j;
    };
    auto witt_opts = [&](CLI::App* s, bool with_y) {
        s->add_option("--p", p, "prime")->required();
        s->add_option("--n", n, "length (defaults to the number of coordinates)");
        s->add_option("--coords", coords, "comma-separated coordinates")->required();
        if (with_y)
            s->add_option("--coords-y", coords_y, "coordinates of the second vector")->required();
        s->add_option("--vars", vars, "polynomial variables");
        s->add_option("--modulus", modulus, "work over Z/modulus");
    };
    auto ring_opts = [&](CLI::App* s) {
        s->add_option("--p", p, "prime")->required();
        s->add_option("--ring", ring, "polynomial ring, e.g. Z[x,y]")->required();
        s->add_option("--lift", lift, "Frobenius lift, one image per variable (default x -> x^p)");
    };

    // arith
    auto* arith = module("arith", "integer linear algebra and polynomials");
    {
        auto [s, l] = leaf(arith, "smith", "arith.smith", "Smith normal form U A V = D");
        s->add_option("--matrix", matrix, "JSON matrix")->required();
        l->args = [&] { return json{{"matrix", json_input(matrix)}}; };
    }
    {
        auto [s, l] = leaf(arith, "intersect", "arith.intersect", "intersect two lattices given by column bases");
        s->add_option("--a", matrix, "JSON matrix")->required();
        s->add_option("--b", mat_b, "JSON matrix")->required();
        l->args = [&] { return json{{"a", json_input(matrix)}, {"b", json_input(mat_b)}}; };
    }
    {
        auto [s, l] = leaf(arith, "div-p", "arith.div_p", "exact division of a polynomial by p");
        s->add_option("--p", p)->required();
        s->add_option("--poly", poly)->required();
        s->add_option("--vars", vars);
        l->args = [&] { return json{{"p", p}, {"poly", poly}, {"variables", split(vars)}}; };
    }
    {
        auto [s, l] = leaf(arith, "apply-map", "arith.apply_map", "apply a ring map to a polynomial");
        s->add_option("--ring", ring, "source ring")->required();
        s->add_option("--target-ring", target_ring, "target ring")->required();
        s->add_option("--images", images, "images of the source variables")->required();
        s->add_option("--poly", poly)->required();
        l->args = [&] {
            return json{{"source", ring_variables(ring)}, {"target", ring_variables(target_ring)},
                        {"images", ints_or_polys(images)}, {"poly", poly}};
        };
    }

    // witt
    auto* witt = module("witt", "p-typical and big Witt vectors, delta-rings");
    {
        auto [s, l] = leaf(witt, "ghost", "witt.ghost", "ghost components");
        witt_opts(s, false);
        l->args = [&] { return witt_vec(false); };
    }
    {
        auto [s, l] = leaf(witt, "from-ghost", "witt.from_ghost", "Witt vector with the given ghost components");
        s->add_option("--p", p)->required();
        s->add_option("--ghost", ghost, "comma-separated ghost components")->required();
        s->add_option("--vars", vars);
        l->args = [&] { return json{{"p", p}, {"ghost", ints_or_polys(ghost)}, {"variables", split(vars)}}; };
    }
    for (auto [name, op, two] : {std::tuple{"add", "witt.add", true}, std::tuple{"mul", "witt.mul", true},
                                 std::tuple{"frob", "witt.frob", false}, std::tuple{"versch", "witt.versch", false}}) {
        auto [s, l] = leaf(witt, name, op, std::string("Witt vector ") + name);
        witt_opts(s, two);
        l->args = [&, two] { return witt_vec(two); };
    }
    {
        auto [s, l] = leaf(witt, "teich", "witt.teich", "Teichmuller representative");
        s->add_option("--p", p)->required();
        s->add_option("--n", n)->required();
        s->add_option("--a", a, "element")->required();
        s->add_option("--vars", vars);
        s->add_option("--modulus", modulus);
        l->args = [&] {
            json j{{"p", p}, {"n", n}, {"a", a}, {"variables", split(vars)}};
            if (!modulus.empty())
                j["modulus"] = std::stol(modulus);
            return j;
        };
    }
    {
        auto [s, l] = leaf(witt, "delta", "witt.delta", "delta structure of a Frobenius lift, with law checks");
        ring_opts(s);
        s->add_option("--a", a, "element whose delta is printed");
        l->args = [&] {
            json j{{"ring", ring_json(ring, lift)}};
            if (!a.empty())
                j["a"] = a;
            return j;
        };
    }
    auto* big = witt->add_subcommand("bigwitt", "big Witt vectors as power series");
    big->require_subcommand(1);
    {
        auto [s, l] = leaf(big, "charpoly", "witt.charpoly", "characteristic polynomial class of an endomorphism");
        s->add_option("--matrix", matrix, "JSON matrix")->required();
        s->add_option("--trunc", trunc, "truncation order");
        l->args = [&] { return json{{"matrix", json_input(matrix)}, {"trunc", trunc}}; };
    }
    for (auto [name, op] : {std::pair{"frob", "witt.bigwitt_frob"}, std::pair{"versch", "witt.bigwitt_versch"}}) {
        auto [s, l] = leaf(big, name, op, std::string("big Witt ") + name);
        s->add_option("--series", series, "coefficients 1, a1, a2, ...")->required();
        s->add_option("--m", m)->required();
        s->add_option("--vars", vars);
        l->args = [&] { return json{{"series", ints_or_polys(series)}, {"m", m}, {"variables", split(vars)}}; };
    }
    {
        auto [s, l] = leaf(big, "add", "witt.bigwitt_add", "big Witt sum (product of series)");
        s->add_option("--series", series)->required();
        s->add_option("--series-b", series_b)->required();
        s->add_option("--vars", vars);
        l->args = [&] {
            return json{{"a", ints_or_polys(series)}, {"b", ints_or_polys(series_b)}, {"variables", split(vars)}};
        };
    }
    {
        auto [s, l] = leaf(big, "ker", "witt.ker", "membership in the kernel of the p-typical projections");
        s->add_option("--series", series)->required();
        s->add_option("--prime-bound", prime_bound);
        s->add_option("--vars", vars);
        l->args = [&] {
            return json{{"series", ints_or_polys(series)}, {"prime_bound", prime_bound}, {"variables", split(vars)}};
        };
    }

    // derham
    auto* derham = module("derham", "de Rham complexes with Frobenius lifts");
    {
        auto [s, l] = leaf(derham, "build", "derham.build", "de Rham complex of a polynomial ring");
        s->add_option("--ring", ring)->required();
        s->add_option("--degree-bound", degree_bound);
        l->args = [&] { return json{{"variables", ring_variables(ring)}, {"degree_bound", degree_bound}}; };
    }
    {
        auto [s, l] = leaf(derham, "frob", "derham.frob", "Frobenius on forms, with dF = pFd check");
        ring_opts(s);
        s->add_option("--degree-bound", degree_bound);
        l->args = [&] { return json{{"ring", ring_json(ring, lift)}, {"degree_bound", degree_bound}}; };
    }
    {
        auto [s, l] = leaf(derham, "map", "derham.map", "universal map out of the de Rham complex");
        ring_opts(s);
        s->add_option("--target-ring", target_ring)->required();
        s->add_option("--target-lift", target_lift);
        s->add_option("--images", images, "images of the source variables")->required();
        l->args = [&] {
            return json{{"source", ring_json(ring, lift)}, {"target", ring_json(target_ring, target_lift)},
                        {"images", ints_or_polys(images)}};
        };
    }

    // dieudonne
    auto* dieu = module("dieudonne", "Dieudonne complexes");
    auto complex_leaf = [&](CLI::App* parent, const char* name, const char* op, const char* help) {
        auto [s, l] = leaf(parent, name, op, help);
        s->add_option("--complex", complex, "complex JSON (inline or file)")->required();
        l->args = [&] { return json{{"complex", json_input(complex)}}; };
        return std::make_pair(s, l);
    };
    complex_leaf(dieu, "check", "dieudonne.check", "check the Dieudonne axioms");
    complex_leaf(dieu, "eta", "dieudonne.eta", "decalage eta_p");
    complex_leaf(dieu, "is-saturated", "dieudonne.is_saturated", "saturation test");
    complex_leaf(dieu, "saturate", "dieudonne.saturate", "iterate eta_p until stable");
    complex_leaf(dieu, "verschiebung", "dieudonne.verschiebung", "V with FV = VF = p");
    {
        auto [s, l] = complex_leaf(dieu, "wr", "dieudonne.wr", "quotient W_r");
        s->add_option("--r", r)->required();
        l->args = [&] { return json{{"complex", json_input(complex)}, {"r", r}}; };
    }
    {
        auto [s, l] = complex_leaf(dieu, "strict", "dieudonne.strict", "strictness probe");
        s->add_option("--r-max", r_max);
        l->args = [&] {
            json j{{"complex", json_input(complex)}};
            if (r_max)
                j["r_max"] = r_max;
            return j;
        };
    }
    {
        auto [s, l] = leaf(dieu, "algebra", "dieudonne.algebra", "Dieudonne algebra axioms on forms");
        ring_opts(s);
        l->args = [&] { return json{{"ring", ring_json(ring, lift)}}; };
    }
    {
        auto [s, l] = leaf(dieu, "classify", "dieudonne.classify", "relations of the classifying datum");
        ring_opts(s);
        s->add_option("--orientation", orientation)->check(CLI::IsMember({"derived", "literal"}));
        l->args = [&] { return json{{"ring", ring_json(ring, lift)}, {"orientation", orientation}}; };
    }

    // mixed
    auto* mix = module("mixed", "graded mixed Dieudonne complexes");
    complex_leaf(mix, "check", "mixed.check", "check the axioms");
    complex_leaf(mix, "twist", "mixed.twist", "weight twist [p]*");
    complex_leaf(mix, "eta", "mixed.eta", "decalage eta_p");
    complex_leaf(mix, "truncate", "mixed.truncate", "Beilinson truncation");
    {
        auto [s, l] = complex_leaf(mix, "heart", "mixed.heart", "embed a Dieudonne complex into the heart");
        s->add_flag("--no-F", no_f, "drop the Frobenius");
        l->args = [&] { return json{{"complex", json_input(complex)}, {"with_F", !no_f}}; };
    }
    {
        auto [s, l] = leaf(mix, "adjoint", "mixed.adjoint", "count both sides of the [p]* -| eta_p adjunction");
        s->add_option("--M", complex, "source complex")->required();
        s->add_option("--N", complex_n, "target complex")->required();
        s->add_option("--precision", precision);
        l->args = [&] {
            json j{{"M", json_input(complex)}, {"N", json_input(complex_n)}};
            if (precision)
                j["precision"] = precision;
            return j;
        };
    }
    {
        auto [s, l] = leaf(mix, "ddr", "mixed.ddr", "graded mixed de Rham complex");
        ring_opts(s);
        s->add_option("--window", window, "weight window");
        l->args = [&] { return json{{"ring", ring_json(ring, lift)}, {"window", window}}; };
    }

    // drw
    auto* drw = module("drw", "truncated de Rham-Witt complexes of polynomial F_p-algebras");
    {
        auto [s, l] = leaf(drw, "compute", "drw.compute", "compute W_n Omega in weights up to the bound");
        s->add_option("--ring", ring, "e.g. F2[x] or F3[x,y]")->required();
        s->add_option("--level", level)->required();
        s->add_option("--weight-bound", weight_bound)->required();
        s->add_option("--route", route)->check(CLI::IsMember({"direct", "saturation", "both"}));
        s->add_option("--headroom", headroom);
        l->args = [&] {
            return json{{"ring", ring}, {"level", level}, {"weight_bound", weight_bound}, {"route", route},
                        {"headroom", headroom}};
        };
    }
    {
        auto [s, l] = leaf(drw, "witt-ring", "drw.witt_ring", "weight-graded presentation of W_n(R)");
        s->add_option("--ring", ring)->required();
        s->add_option("--level", level)->required();
        s->add_option("--weight-bound", weight_bound)->required();
        l->args = [&] { return json{{"ring", ring}, {"level", level}, {"weight_bound", weight_bound}}; };
    }

    // selftest
    {
        auto [s, l] = leaf(&app, "selftest", "selftest", "run the acceptance suites; JSON report on stdout");
        s->add_option("--seed", seed);
        l->args = [&] { return json{{"seed", seed}}; };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return run(chosen, common);
    } catch (const std::exception& e) {
        std::cerr << "dwitt: " << e.what() << "\n";
        return 2;
    }
}
