#include "spectronet/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectronet/calib/calib.hpp"
#include "spectronet/dataset.hpp"
#include "spectronet/siamese/train.hpp"
#include "spectronet/svg.hpp"
#include "spectronet/synth.hpp"

namespace spectronet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_config(const std::string& out_dir, const std::string& name,
                  const json& cfg) {
    std::ofstream f(fs::path(out_dir) / name);
    if (!f) throw DataError("cannot write config archive in '" + out_dir + "'");
    f << cfg.dump(2) << '\n';
}

/// Shared masking flags: an explicit file wins; --no-mask disables; the
/// default is the five standard ignore bands.
struct MaskArgs {
    std::string file;
    bool none = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mask-bands", file,
                        "mask file: one lo,hi pair per line");
        cmd->add_flag("--no-mask", none, "disable wavelength masking");
    }
    WavelengthMask resolve() const {
        if (none) return {};
        if (!file.empty()) return load_mask(file);
        return default_mask();
    }
    json describe() const {
        if (none) return "none";
        if (!file.empty()) return file;
        return "default";
    }
};

int cmd_synth(const std::string& out_dir, const SynthConfig& sc,
              double base_scale, double gain_sigma, double white_sigma,
              std::uint64_t seed) {
    NoiseModel nm = make_default_noise_model(
        make_grid(sc.grid_size, sc.grid_lo, sc.grid_hi), base_scale,
        gain_sigma, white_sigma);
    auto [dataset, truth] = gen_dataset(sc, nm, seed);
    fs::create_directories(out_dir);
    save_dataset(dataset, out_dir);

    std::vector<const std::vector<double>*> sig_cols, noise_cols;
    for (std::size_t i = 0; i < truth.signal.size(); ++i) {
        sig_cols.push_back(&truth.signal[i]);
        noise_cols.push_back(&truth.noise[i]);
    }
    write_spectra_table((fs::path(out_dir) / "truth_signal.csv").string(),
                        dataset.grid, dataset.sample_ids, sig_cols);
    write_spectra_table((fs::path(out_dir) / "truth_noise.csv").string(),
                        dataset.grid, dataset.sample_ids, noise_cols);

    write_config(out_dir, "synth_config.json",
                 json{{"targets", sc.n_targets},
                      {"shots", sc.shots_per_target},
                      {"locations", sc.locations},
                      {"grid", sc.grid_size},
                      {"grid_lo", sc.grid_lo},
                      {"grid_hi", sc.grid_hi},
                      {"base_scale", base_scale},
                      {"gain_sigma", gain_sigma},
                      {"white_sigma", white_sigma},
                      {"seed", seed}});
    std::cout << "wrote " << dataset.size() << " samples ("
              << sc.n_targets << " targets) to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir,
              const MaskArgs& mask, const TrainConfig& tc,
              const SiameseArch& arch_in) {
    Dataset d = load_dataset(data_dir);
    d = apply_mask(d, mask.resolve());

    SiameseArch arch = arch_in;
    arch.n = d.grid.size();
    TrainResult result = train(d, tc, arch);

    fs::create_directories(out_dir);
    CheckpointMeta meta;
    meta.arch = result.model.arch();
    meta.similarity = tc.similarity;
    save_checkpoint(result.model, meta,
                    (fs::path(out_dir) / "model.ckpt").string());

    std::ofstream trace(fs::path(out_dir) / "trace.csv");
    trace << "epoch,loss,rec,orth,align\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        const LossTerms& t = result.epoch_terms[e];
        char line[160];
        std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%.10g,%.10g\n", e,
                      result.epoch_loss[e], t.rec, t.orth, t.align);
        trace << line;
        std::cout << "epoch " << e << " loss " << result.epoch_loss[e] << "\n";
    }

    write_config(out_dir, "train_config.json",
                 json{{"data", data_dir},
                      {"mask", mask.describe()},
                      {"epochs", tc.epochs},
                      {"batch", tc.batch_size},
                      {"lr", tc.lr},
                      {"momentum", tc.momentum},
                      {"n_align", tc.n_align},
                      {"loss_align", similarity_name(tc.similarity)},
                      {"lambda_rec", tc.lambda_rec},
                      {"lambda_orth", tc.lambda_orth},
                      {"lambda_align", tc.lambda_align},
                      {"micro_batch", tc.micro_batch},
                      {"depth", arch.depth},
                      {"features", arch.features},
                      {"kernel", arch.kernel},
                      {"residual", arch.residual},
                      {"n", arch.n},
                      {"seed", tc.seed}});
    std::cout << "checkpoint written to "
              << (fs::path(out_dir) / "model.ckpt").string() << "\n";
    return 0;
}

int cmd_clean(const std::string& data_dir, const std::string& ckpt_path,
              const std::string& out_dir, const MaskArgs& mask) {
    auto [model, meta] = load_checkpoint(ckpt_path);
    Dataset d = load_dataset(data_dir);
    d = apply_mask(d, mask.resolve());
    if (d.grid.size() != meta.arch.n) {
        throw DataError("clean: masked data has " +
                        std::to_string(d.grid.size()) +
                        " bins but the checkpoint expects " +
                        std::to_string(meta.arch.n));
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Spectrum> cleaned = clean_batch(model, d.samples);
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    const double rate = static_cast<double>(cleaned.size()) /
                        std::max(seconds, 1e-9);

    fs::create_directories(out_dir);
    std::vector<const std::vector<double>*> cols;
    for (const Spectrum& s : cleaned) cols.push_back(&s.intensities);
    write_spectra_table((fs::path(out_dir) / "cleaned.csv").string(), d.grid,
                        d.sample_ids, cols);
    write_config(out_dir, "clean_config.json",
                 json{{"data", data_dir},
                      {"checkpoint", ckpt_path},
                      {"mask", mask.describe()}});
    char msg[128];
    std::snprintf(msg, sizeof msg, "cleaned %zu spectra in %.3f s (%.1f spectra/s)\n",
                  cleaned.size(), seconds, rate);
    std::cout << msg;
    return 0;
}

int cmd_calibrate(const std::string& data_dir, const std::string& rep,
                  const std::string& cleaned_path_in,
                  const std::string& out_dir, const MaskArgs& mask,
                  const std::string& oxide_arg, const LooConfig& lc_in,
                  std::uint64_t seed) {
    if (rep != "raw" && rep != "cleaned") {
        throw UsageError("--rep must be one of: raw, cleaned");
    }
    Dataset d = load_dataset(data_dir);
    d = apply_mask(d, mask.resolve());

    if (rep == "cleaned") {
        const std::string cleaned_path =
            cleaned_path_in.empty()
                ? (fs::path(data_dir) / "cleaned.csv").string()
                : cleaned_path_in;
        SpectraTable t = read_spectra_table(cleaned_path);
        require_same_grid(t.grid, d.grid, "calibrate: cleaned vs raw");
        if (t.ids != d.sample_ids) {
            throw DataError("calibrate: cleaned table sample ids differ from "
                            "the dataset");
        }
        for (std::size_t i = 0; i < d.samples.size(); ++i) {
            d.samples[i].intensities = std::move(t.columns[i]);
        }
    }

    std::vector<Oxide> oxides;
    if (oxide_arg.empty()) {
        for (std::size_t i = 0; i < kNumOxides; ++i) {
            oxides.push_back(static_cast<Oxide>(i));
        }
    } else {
        oxides.push_back(oxide_from_name(oxide_arg));
    }

    LooConfig lc = lc_in;
    lc.seed = seed;
    RepFn identity = [](const Spectrum& s) { return s.intensities; };

    fs::create_directories(out_dir);
    std::ofstream results(fs::path(out_dir) / "results.csv");
    results << "oxide,target_id,truth,prediction\n";
    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "oxide,rmse,maxe,representation\n";
    for (Oxide oxide : oxides) {
        CalibrationRecord rec = loo_evaluate(d, identity, oxide, lc);
        for (std::size_t i = 0; i < rec.target_ids.size(); ++i) {
            char line[160];
            std::snprintf(line, sizeof line, "%s,%s,%.10g,%.10g\n",
                          oxide_name(oxide), rec.target_ids[i].c_str(),
                          rec.truth[i], rec.prediction[i]);
            results << line;
        }
        char line[128];
        std::snprintf(line, sizeof line, "%s,%.10g,%.10g,%s\n",
                      oxide_name(oxide), rec.rmse, rec.maxe, rep.c_str());
        summary << line;
        std::cout << oxide_name(oxide) << " rmse " << rec.rmse << " maxe "
                  << rec.maxe << " (" << rep << ")\n";
    }

    write_config(out_dir, "calibrate_config.json",
                 json{{"data", data_dir},
                      {"rep", rep},
                      {"oxide", oxide_arg.empty() ? "all" : oxide_arg},
                      {"kfold", lc.kfold},
                      {"head_epochs", lc.head.epochs},
                      {"head_lr", lc.head.lr0},
                      {"head_decay_start", lc.head.decay_start},
                      {"head_batch", lc.head.batch_size},
                      {"clamp", lc.clamp_nonnegative},
                      {"mask", mask.describe()},
                      {"seed", seed}});
    return 0;
}

int cmd_plot(const std::string& data_dir, const std::string& cleaned_path_in,
             const std::string& results_path, const std::string& out_dir,
             const std::string& samples_arg, const MaskArgs& mask) {
    fs::create_directories(out_dir);
    bool wrote_anything = false;

    if (!data_dir.empty()) {
        Dataset d = load_dataset(data_dir);
        d = apply_mask(d, mask.resolve());
        const std::string cleaned_path =
            cleaned_path_in.empty()
                ? (fs::path(data_dir) / "cleaned.csv").string()
                : cleaned_path_in;
        SpectraTable cleaned = read_spectra_table(cleaned_path);
        require_same_grid(cleaned.grid, d.grid, "plot: cleaned vs raw");

        std::vector<std::string> wanted;
        if (samples_arg.empty()) {
            wanted.push_back(d.sample_ids.front());
        } else {
            std::string cur;
            for (char c : samples_arg + ",") {
                if (c == ',') {
                    if (!cur.empty()) wanted.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
        }
        for (const std::string& id : wanted) {
            auto rit = std::find(d.sample_ids.begin(), d.sample_ids.end(), id);
            auto cit = std::find(cleaned.ids.begin(), cleaned.ids.end(), id);
            if (rit == d.sample_ids.end() || cit == cleaned.ids.end()) {
                throw DataError("plot: sample '" + id +
                                "' not present in both tables");
            }
            const std::size_t ri = rit - d.sample_ids.begin();
            const std::size_t ci = cit - cleaned.ids.begin();
            svg::write_overlay(
                (fs::path(out_dir) / ("overlay_" + id + ".svg")).string(),
                d.grid, d.samples[ri].intensities, cleaned.columns[ci], id);
            wrote_anything = true;
        }
    }

    if (!results_path.empty()) {
        std::ifstream in(results_path);
        if (!in) throw DataError("cannot open results '" + results_path + "'");
        std::string line;
        std::getline(in, line); // header
        struct Rows {
            std::vector<double> truth, pred;
        };
        std::map<std::string, Rows> per_oxide;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string oxide, target, truth_s, pred_s;
            std::getline(ss, oxide, ',');
            std::getline(ss, target, ',');
            std::getline(ss, truth_s, ',');
            std::getline(ss, pred_s, ',');
            per_oxide[oxide].truth.push_back(std::stod(truth_s));
            per_oxide[oxide].pred.push_back(std::stod(pred_s));
        }
        if (per_oxide.empty()) {
            throw DataError("plot: results file '" + results_path +
                            "' has no rows");
        }
        for (const auto& [oxide, rows] : per_oxide) {
            svg::write_scatter(
                (fs::path(out_dir) / ("scatter_" + oxide + ".svg")).string(),
                rows.truth, rows.pred, oxide, rmse(rows.pred, rows.truth));
            wrote_anything = true;
        }
    }

    if (!wrote_anything) {
        throw UsageError("plot: nothing to plot (give --data and/or "
                         "--results)");
    }
    write_config(out_dir, "plot_config.json",
                 json{{"data", data_dir},
                      {"results", results_path},
                      {"samples", samples_arg},
                      {"mask", mask.describe()}});
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"spectronet: self-supervised spectroscopy signal cleaning"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset "
                                              "with known signal/noise truth");
    SynthConfig sc;
    double base_scale = 8.0, gain_sigma = 0.05, white_sigma = 0.3;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--targets", sc.n_targets)->check(CLI::PositiveNumber);
    synth->add_option("--shots", sc.shots_per_target)
        ->check(CLI::PositiveNumber);
    synth->add_option("--locations", sc.locations)->check(CLI::PositiveNumber);
    synth->add_option("--grid", sc.grid_size)->check(CLI::PositiveNumber);
    synth->add_option("--grid-lo", sc.grid_lo);
    synth->add_option("--grid-hi", sc.grid_hi);
    synth->add_option("--base-scale", base_scale);
    synth->add_option("--gain-sigma", gain_sigma);
    synth->add_option("--white-sigma", white_sigma);
    synth->add_option("--seed", synth_seed);

    // train
    auto* tr = app.add_subcommand("train", "train the two-channel model");
    std::string train_data, train_out;
    MaskArgs train_mask;
    TrainConfig tc;
    SiameseArch arch;
    std::string loss_align = "cosine";
    tr->add_option("--data", train_data, "dataset directory")->required();
    tr->add_option("--out", train_out, "output directory")->required();
    train_mask.attach(tr);
    tr->add_option("--epochs", tc.epochs)->check(CLI::PositiveNumber);
    tr->add_option("--batch", tc.batch_size)->check(CLI::PositiveNumber);
    tr->add_option("--lr", tc.lr);
    tr->add_option("--momentum", tc.momentum);
    tr->add_option("--n-align", tc.n_align)->check(CLI::PositiveNumber);
    tr->add_option("--loss-align", loss_align)
        ->check(CLI::IsMember({"cosine", "raw_inner"}));
    tr->add_option("--lambda-rec", tc.lambda_rec);
    tr->add_option("--lambda-orth", tc.lambda_orth);
    tr->add_option("--lambda-align", tc.lambda_align);
    tr->add_option("--micro-batch", tc.micro_batch)
        ->check(CLI::PositiveNumber);
    tr->add_option("--depth", arch.depth)->check(CLI::Range(2u, 1000u));
    tr->add_option("--features", arch.features)->check(CLI::PositiveNumber);
    tr->add_option("--kernel", arch.kernel)->check(CLI::PositiveNumber);
    tr->add_flag("--residual", arch.residual,
                 "signal channel predicts a subtracted correction");
    tr->add_option("--seed", tc.seed);

    // clean
    auto* cl = app.add_subcommand("clean", "apply a trained model to spectra");
    std::string clean_data, clean_ckpt, clean_out;
    MaskArgs clean_mask;
    cl->add_option("--data", clean_data, "dataset directory")->required();
    cl->add_option("--checkpoint", clean_ckpt, "model checkpoint")->required();
    cl->add_option("--out", clean_out, "output directory")->required();
    clean_mask.attach(cl);

    // calibrate
    auto* ca = app.add_subcommand(
        "calibrate", "leave-one-out oxide regression on a representation");
    std::string cal_data, cal_out, cal_rep = "raw", cal_cleaned, cal_oxide;
    MaskArgs cal_mask;
    LooConfig lc;
    std::uint64_t cal_seed = 0;
    ca->add_option("--data", cal_data, "dataset directory")->required();
    ca->add_option("--out", cal_out, "output directory")->required();
    ca->add_option("--rep", cal_rep, "representation: raw or cleaned")
        ->check(CLI::IsMember({"raw", "cleaned"}));
    ca->add_option("--cleaned", cal_cleaned,
                   "cleaned spectra table (default <data>/cleaned.csv)");
    ca->add_option("--oxide", cal_oxide, "single oxide (default: all 8)");
    ca->add_option("--kfold", lc.kfold,
                   "use k folds instead of full LOO past 100 standards");
    ca->add_option("--head-epochs", lc.head.epochs)
        ->check(CLI::PositiveNumber);
    ca->add_option("--head-lr", lc.head.lr0);
    ca->add_option("--head-decay-start", lc.head.decay_start);
    ca->add_option("--head-batch", lc.head.batch_size)
        ->check(CLI::PositiveNumber);
    ca->add_flag("--clamp", lc.clamp_nonnegative,
                 "clamp predictions at zero");
    ca->add_option("--seed", cal_seed);
    cal_mask.attach(ca);

    // plot
    auto* pl = app.add_subcommand("plot", "write SVG figures");
    std::string plot_data, plot_cleaned, plot_results, plot_out, plot_samples;
    MaskArgs plot_mask;
    pl->add_option("--data", plot_data, "dataset directory (for overlays)");
    pl->add_option("--cleaned", plot_cleaned,
                   "cleaned spectra table (default <data>/cleaned.csv)");
    pl->add_option("--results", plot_results,
                   "calibration results.csv (for scatters)");
    pl->add_option("--out", plot_out, "output directory")->required();
    pl->add_option("--samples", plot_samples,
                   "comma-separated sample ids to overlay");
    plot_mask.attach(pl);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_out, sc, base_scale, gain_sigma,
                             white_sigma, synth_seed);
        }
        if (tr->parsed()) {
            tc.similarity = similarity_from_name(loss_align);
            return cmd_train(train_data, train_out, train_mask, tc, arch);
        }
        if (cl->parsed()) {
            return cmd_clean(clean_data, clean_ckpt, clean_out, clean_mask);
        }
        if (ca->parsed()) {
            return cmd_calibrate(cal_data, cal_rep, cal_cleaned, cal_out,
                                 cal_mask, cal_oxide, lc, cal_seed);
        }
        if (pl->parsed()) {
            return cmd_plot(plot_data, plot_cleaned, plot_results, plot_out,
                            plot_samples, plot_mask);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace spectronet::cli
