#include "hvlab/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "hvlab/analysis.hpp"
#include "hvlab/angle_expr.hpp"
#include "hvlab/checkers.hpp"
#include "hvlab/partition.hpp"
#include "hvlab/sampling.hpp"
#include "hvlab/tables.hpp"

namespace hvlab::cli {
namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class WriteError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class Format
{
    Csv,
    Json,
};

/// Raw flag values; only those that appeared on the command line are used.
struct Flags
{
    std::string model = "gr";
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::string omega;
    std::string omega_grid;
    std::string theta_grid;
    std::string grid_file;
    std::string out;
    std::string format;
    bool hide_lambda = false;
    unsigned threads = 0;
    std::string svg;
    std::string config;
};

/// Resolved options after merging the config file under the flags.
struct Options
{
    std::string model = "gr";
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::optional<double> omega;
    std::optional<std::vector<double>> omega_grid;
    std::optional<std::vector<double>> theta_grid;
    std::string grid_file;
    std::string out;
    std::optional<Format> format;
    bool hide_lambda = false;
    unsigned threads = 0;
    std::string svg;
    bool model_given = false;
};

json read_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    json j;
    try
    {
        in >> j;
    }
    catch (json::exception const& e)
    {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object())
    {
        throw ConfigError("config file '" + path + "' must hold a JSON object");
    }
    static std::set<std::string> const known{"model",      "samples",  "seed",        "omega",   "omega-grid",
                                             "theta-grid", "grid-file", "out",        "format",  "hide-lambda",
                                             "threads",    "svg"};
    for (auto const& [key, value] : j.items())
    {
        if (!known.contains(key))
        {
            throw ConfigError("config file '" + path + "' has unknown key '" + key + "'");
        }
    }
    return j;
}

double angle_value(json const& j)
{
    return j.is_string() ? parse_angle(j.get<std::string>()) : j.get<double>();
}

Format parse_format(std::string const& text)
{
    if (text == "csv")
    {
        return Format::Csv;
    }
    if (text == "json")
    {
        return Format::Json;
    }
    throw std::invalid_argument("unknown format '" + text + "' (expected csv or json)");
}

Options resolve(Flags const& f, CLI::App const& app, json const& cfg)
{
    auto given = [&app](char const* name) { return app.count(name) > 0; };
    auto from_config = [&cfg](char const* key) { return cfg.contains(key); };

    Options o;
    try
    {
        if (from_config("model"))
        {
            o.model = cfg["model"].get<std::string>();
            o.model_given = true;
        }
        if (from_config("samples"))
        {
            o.samples = cfg["samples"].get<std::uint64_t>();
        }
        if (from_config("seed"))
        {
            o.seed = cfg["seed"].get<std::uint64_t>();
        }
        if (from_config("omega"))
        {
            o.omega = angle_value(cfg["omega"]);
        }
        if (from_config("omega-grid"))
        {
            o.omega_grid = parse_angle_grid(cfg["omega-grid"].get<std::string>());
        }
        if (from_config("theta-grid"))
        {
            o.theta_grid = parse_angle_grid(cfg["theta-grid"].get<std::string>());
        }
        if (from_config("grid-file"))
        {
            o.grid_file = cfg["grid-file"].get<std::string>();
        }
        if (from_config("out"))
        {
            o.out = cfg["out"].get<std::string>();
        }
        if (from_config("format"))
        {
            o.format = parse_format(cfg["format"].get<std::string>());
        }
        if (from_config("hide-lambda"))
        {
            o.hide_lambda = cfg["hide-lambda"].get<bool>();
        }
        if (from_config("threads"))
        {
            o.threads = cfg["threads"].get<unsigned>();
        }
        if (from_config("svg"))
        {
            o.svg = cfg["svg"].get<std::string>();
        }
    }
    catch (json::exception const& e)
    {
        throw ConfigError(std::string("config value has the wrong type: ") + e.what());
    }

    if (given("--model"))
    {
        o.model = f.model;
        o.model_given = true;
    }
    if (given("--samples"))
    {
        o.samples = f.samples;
    }
    if (given("--seed"))
    {
        o.seed = f.seed;
    }
    if (given("--omega"))
    {
        o.omega = parse_angle(f.omega);
    }
    if (given("--omega-grid"))
    {
        o.omega_grid = parse_angle_grid(f.omega_grid);
    }
    if (given("--theta-grid"))
    {
        o.theta_grid = parse_angle_grid(f.theta_grid);
    }
    if (given("--grid-file"))
    {
        o.grid_file = f.grid_file;
    }
    if (given("--out"))
    {
        o.out = f.out;
    }
    if (given("--format"))
    {
        o.format = parse_format(f.format);
    }
    if (given("--hide-lambda"))
    {
        o.hide_lambda = true;
    }
    if (given("--threads"))
    {
        o.threads = f.threads;
    }
    if (o.samples == 0)
    {
        throw std::invalid_argument("--samples must be positive");
    }
    return o;
}

/// Writes through `body` to the --out file, or to `out` when none is set.
template<class Body>
void emit(std::string const& path, std::ostream& out, Body&& body)
{
    if (path.empty())
    {
        body(out);
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
    {
        throw WriteError("cannot open output file '" + path + "' for writing");
    }
    body(file);
    file.flush();
    if (!file)
    {
        throw WriteError("write to output file '" + path + "' failed");
    }
}

SettingsGrid grid_or(Options const& o, SettingsGrid fallback)
{
    if (o.grid_file.empty())
    {
        return fallback;
    }
    std::ifstream probe(o.grid_file);
    if (!probe)
    {
        throw ConfigError("cannot read grid file '" + o.grid_file + "'");
    }
    return SettingsGrid::load(o.grid_file);
}

RunConfig run_config(Options const& o, SettingsGrid grid)
{
    RunConfig cfg;
    cfg.model = Model::parse(o.model);
    cfg.grid = std::move(grid);
    cfg.samples = o.samples;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

int cmd_simulate(Options const& o, std::ostream& out)
{
    auto const cfg = run_config(o, grid_or(o, SettingsGrid::single_pair(o.omega.value_or(kPi / 2))));
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Csv) == Format::Csv)
        {
            CsvEventWriter writer(s, cfg.grid, o.hide_lambda);
            run_experiment(cfg, [&writer](std::span<EventRecord const> r) { writer.write(r); });
            return;
        }
        auto const labels_a = cfg.grid.labels_a();
        auto const labels_b = cfg.grid.labels_b();
        json events = json::array();
        run_experiment(cfg, [&](std::span<EventRecord const> records) {
            for (auto const& r : records)
            {
                json e = {{"run", r.run_index}, {"a", labels_a[r.a_index]}, {"b", labels_b[r.b_index]}};
                if (!o.hide_lambda)
                {
                    e["lambda"] = {r.lambda.x(), r.lambda.y(), r.lambda.z()};
                }
                e["x"] = r.x;
                e["y"] = r.y;
                events.push_back(std::move(e));
            }
        });
        json doc = {{"model", cfg.model.name()}, {"seed", cfg.seed}, {"grid", cfg.grid.to_json()},
                    {"events", std::move(events)}};
        s << doc.dump(2) << '\n';
    });
    return kExitOk;
}

int cmd_correlate(Options const& o, std::ostream& out)
{
    std::vector<double> omegas;
    if (o.omega_grid)
    {
        omegas = *o.omega_grid;
    }
    else if (o.omega)
    {
        omegas = {*o.omega};
    }
    else
    {
        omegas = parse_angle_grid("0:pi:25");
    }
    auto const curve = correlation_curve(Model::parse(o.model), omegas, o.samples, o.seed, o.threads);
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Csv) == Format::Csv)
        {
            write_curve_csv(s, curve);
            return;
        }
        json points = json::array();
        for (auto const& p : curve)
        {
            points.push_back({{"omega", p.omega},
                              {"E", p.estimate},
                              {"E_analytic", p.analytic},
                              {"stderr", p.std_error},
                              {"N", p.samples}});
        }
        s << json{{"model", o.model}, {"seed", o.seed}, {"points", points}}.dump(2) << '\n';
    });
    return kExitOk;
}

int cmd_chsh(Options const& o, std::ostream& out)
{
    auto const grid = grid_or(o, ChshSettings::optimal_planar().grid());
    auto const r = chsh(Model::parse(o.model), grid, o.samples, o.seed, o.threads);
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Csv) == Format::Csv)
        {
            s << "S,stderr,E_ab,E_ab',E_a'b,E_a'b',N\n"
              << format_double(r.value) << ',' << format_double(r.std_error) << ',' << format_double(r.e_ab.value)
              << ',' << format_double(r.e_ab_prime.value) << ',' << format_double(r.e_a_prime_b.value) << ','
              << format_double(r.e_a_prime_b_prime.value) << ',' << o.samples << '\n';
            return;
        }
        json doc = {{"model", o.model},
                    {"seed", o.seed},
                    {"S", r.value},
                    {"stderr", r.std_error},
                    {"E_ab", r.e_ab.value},
                    {"E_ab'", r.e_ab_prime.value},
                    {"E_a'b", r.e_a_prime_b.value},
                    {"E_a'b'", r.e_a_prime_b_prime.value},
                    {"N", o.samples}};
        s << doc.dump(2) << '\n';
    });
    return kExitOk;
}

int cmd_region_map(Options const& o, std::ostream& out)
{
    if (o.model_given && o.model != "gr")
    {
        throw std::invalid_argument("region-map is defined for --model gr only");
    }
    auto const map = region_map(o.omega_grid.value_or(default_region_omegas(50)),
                                o.theta_grid.value_or(default_region_thetas(50)));
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Csv) == Format::Csv)
        {
            write_region_csv(s, map);
            return;
        }
        json cells = json::array();
        for (auto const& c : map.cells)
        {
            cells.push_back({{"omega", c.omega},
                             {"theta", c.theta},
                             {"analytic", c.analytic},
                             {"mc", c.mc},
                             {"near_boundary", c.near_boundary},
                             {"extrapolated", c.extrapolated}});
        }
        json doc = {{"compared", map.compared()}, {"agreements", map.agreements()}, {"cells", cells}};
        s << doc.dump(2) << '\n';
    });
    if (!o.svg.empty())
    {
        emit(o.svg, out, [&](std::ostream& s) { write_region_svg(s, map); });
    }
    return kExitOk;
}

JointTable event_table(Options const& o, RunConfig const& cfg)
{
    auto const partition = o.hide_lambda ? LambdaPartition::trivial() : LambdaPartition::for_model(cfg.model, cfg.grid);
    return build_table(cfg, partition);
}

int cmd_audit(Options const& o, std::ostream& out, std::ostream& err)
{
    auto const cfg = run_config(o, grid_or(o, SettingsGrid::chsh()));
    auto const table = event_table(o, cfg);
    auto const audit =
        audit_implications(table, {cfg.model.deterministic(), cfg.model.qm_equivalent()}, !o.hide_lambda);
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Json) == Format::Json)
        {
            json doc = audit.to_json();
            doc["model"] = cfg.model.name();
            doc["samples"] = cfg.samples;
            doc["seed"] = cfg.seed;
            s << doc.dump(2) << '\n';
            return;
        }
        s << "id,pass,max_deviation,tolerance,evaluated,skipped\n";
        for (auto const& r : audit.reports)
        {
            s << r.id << ',' << (r.pass ? 1 : 0) << ',' << format_double(r.max_deviation) << ','
              << format_double(r.tolerance) << ',' << r.evaluated_cells << ',' << r.skipped_cells << '\n';
        }
    });
    if (audit.inconsistent())
    {
        err << "audit: INCONSISTENT (fw_ns_st_implies_fr=" << audit.fr_chain_status
            << ", deterministic_qm_forces_pi_failure=" << audit.det_chain_status << ")\n";
        return kExitInconsistent;
    }
    return kExitOk;
}

int cmd_table_export(Options const& o, std::ostream& out)
{
    auto const cfg = run_config(o, grid_or(o, SettingsGrid::chsh()));
    auto const table = event_table(o, cfg);
    emit(o.out, out, [&](std::ostream& s) {
        if (o.format.value_or(Format::Json) == Format::Json)
        {
            s << table.to_json().dump(2) << '\n';
            return;
        }
        auto const& vars = table.variables();
        for (auto const& v : vars)
        {
            s << v.name << ',';
        }
        s << "p\n";
        std::vector<std::size_t> idx(vars.size(), 0);
        for (double const p : table.probabilities())
        {
            for (std::size_t v = 0; v < vars.size(); ++v)
            {
                s << vars[v].alphabet[idx[v]] << ',';
            }
            s << format_double(p) << '\n';
            for (std::size_t v = vars.size(); v-- > 0;)
            {
                if (++idx[v] < vars[v].alphabet.size())
                {
                    break;
                }
                idx[v] = 0;
            }
        }
    });
    return kExitOk;
}

}  // namespace

int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hidden-variable model laboratory"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "Show help for every command");

    Flags f;
    app.add_option("--model", f.model, "gr, bell, qm or localdet:<mixture.json>");
    app.add_option("--samples", f.samples, "Runs per estimate");
    app.add_option("--seed", f.seed, "Master seed");
    app.add_option("--omega", f.omega, "Angle between the settings, e.g. 3pi/4");
    app.add_option("--omega-grid", f.omega_grid, "lo:hi:n");
    app.add_option("--theta-grid", f.theta_grid, "lo:hi:n");
    app.add_option("--grid-file", f.grid_file, "Settings grid JSON");
    app.add_option("--out", f.out, "Output path (default: standard output)");
    app.add_option("--format", f.format, "csv or json");
    app.add_flag("--hide-lambda", f.hide_lambda, "Drop lambda from outputs and audits");
    app.add_option("--threads", f.threads, "Worker cap (0: hardware concurrency)");
    app.add_option("--config", f.config, "JSON file with option defaults; flags win");

    auto* simulate = app.add_subcommand("simulate", "Write per-run events as CSV");
    auto* correlate = app.add_subcommand("correlate", "Estimate E(omega) over an omega grid");
    auto* chsh_cmd = app.add_subcommand("chsh", "Estimate the CHSH value");
    auto* region = app.add_subcommand("region-map", "Map signaling witnesses over (omega, theta)");
    region->add_option("--svg", f.svg, "Also write an SVG heatmap");
    auto* audit = app.add_subcommand("audit", "Run the constraint checkers and implication audit");
    auto* table_export = app.add_subcommand("table-export", "Write the discretized joint table");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e, out, err);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e, out, err);
    }
    catch (CLI::ExtrasError const& e)
    {
        err << "error: unknown flag or argument: " << e.what() << '\n';
        return kExitError;
    }
    catch (CLI::ParseError const& e)
    {
        err << "error: invalid command line: " << e.what() << '\n';
        return kExitError;
    }

    try
    {
        json const cfg = f.config.empty() ? json::object() : read_config(f.config);
        Options o = resolve(f, app, cfg);
        if (region->count("--svg") > 0)
        {
            o.svg = f.svg;
        }

        if (simulate->parsed())
        {
            return cmd_simulate(o, out);
        }
        if (correlate->parsed())
        {
            return cmd_correlate(o, out);
        }
        if (chsh_cmd->parsed())
        {
            return cmd_chsh(o, out);
        }
        if (region->parsed())
        {
            return cmd_region_map(o, out);
        }
        if (audit->parsed())
        {
            return cmd_audit(o, out, err);
        }
        if (table_export->parsed())
        {
            return cmd_table_export(o, out);
        }
    }
    catch (ConfigError const& e)
    {
        err << "error: config: " << e.what() << '\n';
        return kExitError;
    }
    catch (WriteError const& e)
    {
        err << "error: output: " << e.what() << '\n';
        return kExitError;
    }
    catch (std::exception const& e)
    {
        err << "error: invalid input: " << e.what() << '\n';
        return kExitError;
    }
    err << "error: no command given\n";
    return kExitError;
}

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    std::vector<char const*> argv{"hvlab"};
    for (auto const& a : args)
    {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hvlab::cli
