#include "cardnet/train_report.hpp"

#include "io.hpp"

namespace cardnet {

using nlohmann::json;

std::string TrainReport::to_jsonl() const {
  std::string out;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const auto& e : epochs)
    out += json{{"type", "epoch"},
                {"epoch", e.epoch},
                {"train_loss", e.train_loss},
                {"eval_accuracy", opt(e.eval_accuracy)},
                {"learning_rate", e.learning_rate},
                {"wall_seconds", e.wall_seconds}}
               .dump() +
           "\n";
  out += json{{"type", "summary"},
              {"kind", kind},
              {"epochs", epochs.size()},
              {"final_accuracy", opt(final_accuracy)},
              {"wall_seconds", wall_seconds},
              {"config", config}}
             .dump() +
         "\n";
  return out;
}

void TrainReport::write(const std::filesystem::path& path) const { detail::write_text(path, to_jsonl()); }

}  // namespace cardnet
