#include "harness/config.hpp"

#include <fstream>
#include <sstream>

#include "core/check.hpp"
#include "json.hpp"

namespace graphae {

using nlohmann::json;

const char* train_mode_name(TrainMode m) {
    return m == TrainMode::self_supervised ? "self_supervised" : "baseline";
}

TrainMode train_mode_from_name(const std::string& s) {
    if (s == "self_supervised") return TrainMode::self_supervised;
    if (s == "baseline") return TrainMode::baseline;
    GA_CHECK(false, "unknown train mode: " + s);
    return TrainMode::self_supervised;
}

double lr_at_epoch(const ScheduleConfig& s, int epoch) {
    GA_CHECK(epoch >= 1 && epoch <= s.epochs, "lr_at_epoch: epoch out of range");
    return epoch >= s.decay_epoch ? s.initial_lr * s.decay_factor : s.initial_lr;
}

ExperimentConfig default_config(TrainMode mode) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    if (mode == TrainMode::baseline)
        cfg.schedule = ScheduleConfig{3e-4, 15, 11, 0.1};
    return cfg;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["n_seeds"] = c.n_seeds;
    j["n_max"] = c.n_max;
    j["mode"] = train_mode_name(c.mode);
    j["data"] = {{"dir", c.data.dir},
                 {"n_samples", c.data.n_samples},
                 {"seed", c.data.seed},
                 {"gen",
                  {{"canvas", c.data.gen.canvas},
                   {"stroke_width", c.data.gen.stroke_width},
                   {"margin_px", c.data.gen.margin_px},
                   {"min_vertex_dist_px", c.data.gen.min_vertex_dist_px},
                   {"scale_lo", c.data.gen.scale_lo},
                   {"scale_hi", c.data.gen.scale_hi},
                   {"shear_lo", c.data.gen.shear_lo},
                   {"shear_hi", c.data.gen.shear_hi},
                   {"max_attempts", c.data.gen.max_attempts}}}};
    j["optimizer"] = {{"kind", c.optimizer.kind},
                      {"batch_size", c.optimizer.batch_size},
                      {"micro_batch", c.optimizer.micro_batch},
                      {"beta1", c.optimizer.beta1},
                      {"beta2", c.optimizer.beta2},
                      {"eps", c.optimizer.eps},
                      {"weight_decay", c.optimizer.weight_decay}};
    j["schedule"] = {{"initial_lr", c.schedule.initial_lr},
                     {"epochs", c.schedule.epochs},
                     {"decay_epoch", c.schedule.decay_epoch},
                     {"decay_factor", c.schedule.decay_factor}};
    j["loss"] = {{"lambda_aux", c.loss.lambda_aux},
                 {"similarity", similarity_name(c.loss.similarity)},
                 {"target", loss_target_name(c.loss.target)},
                 {"ms_ssim_scales", c.loss.ms_ssim_scales},
                 {"window", c.loss.window}};
    j["eval"] = {{"threshold", c.eval.threshold},
                 {"merge_radius", c.eval.merge_radius},
                 {"tol", c.eval.tol},
                 {"batch_size", c.eval.batch_size}};
    j["baseline_stage1_epochs"] = c.baseline_stage1_epochs;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;
    c.seed = j.at("seed").get<uint64_t>();
    c.n_seeds = j.at("n_seeds").get<int>();
    c.n_max = j.at("n_max").get<int>();
    c.mode = train_mode_from_name(j.at("mode").get<std::string>());
    const auto& d = j.at("data");
    c.data.dir = d.at("dir").get<std::string>();
    c.data.n_samples = d.at("n_samples").get<int>();
    c.data.seed = d.at("seed").get<uint64_t>();
    const auto& g = d.at("gen");
    c.data.gen.canvas = g.at("canvas").get<int>();
    c.data.gen.stroke_width = g.at("stroke_width").get<double>();
    c.data.gen.margin_px = g.at("margin_px").get<double>();
    c.data.gen.min_vertex_dist_px = g.at("min_vertex_dist_px").get<double>();
    c.data.gen.scale_lo = g.at("scale_lo").get<double>();
    c.data.gen.scale_hi = g.at("scale_hi").get<double>();
    c.data.gen.shear_lo = g.at("shear_lo").get<double>();
    c.data.gen.shear_hi = g.at("shear_hi").get<double>();
    c.data.gen.max_attempts = g.at("max_attempts").get<int>();
    const auto& o = j.at("optimizer");
    c.optimizer.kind = o.at("kind").get<std::string>();
    c.optimizer.batch_size = o.at("batch_size").get<int>();
    c.optimizer.micro_batch = o.at("micro_batch").get<int>();
    c.optimizer.beta1 = o.at("beta1").get<double>();
    c.optimizer.beta2 = o.at("beta2").get<double>();
    c.optimizer.eps = o.at("eps").get<double>();
    c.optimizer.weight_decay = o.at("weight_decay").get<double>();
    const auto& s = j.at("schedule");
    c.schedule.initial_lr = s.at("initial_lr").get<double>();
    c.schedule.epochs = s.at("epochs").get<int>();
    c.schedule.decay_epoch = s.at("decay_epoch").get<int>();
    c.schedule.decay_factor = s.at("decay_factor").get<double>();
    const auto& l = j.at("loss");
    c.loss.lambda_aux = l.at("lambda_aux").get<double>();
    c.loss.similarity = similarity_from_name(l.at("similarity").get<std::string>());
    c.loss.target = loss_target_from_name(l.at("target").get<std::string>());
    c.loss.ms_ssim_scales = l.at("ms_ssim_scales").get<int>();
    c.loss.window = l.at("window").get<int>();
    const auto& e = j.at("eval");
    c.eval.threshold = e.at("threshold").get<double>();
    c.eval.merge_radius = e.at("merge_radius").get<double>();
    c.eval.tol = e.at("tol").get<double>();
    c.eval.batch_size = e.at("batch_size").get<int>();
    c.baseline_stage1_epochs = j.at("baseline_stage1_epochs").get<int>();
    return c;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    GA_CHECK(out.good(), "save_config: cannot open " + path);
    out << config_to_json(cfg) << "\n";
    GA_CHECK(out.good(), "save_config: write failed for " + path);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    GA_CHECK(in.good(), "load_config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

}  // namespace graphae
