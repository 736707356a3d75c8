#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "propdet/corpus.hpp"
#include "propdet/embeddings.hpp"
#include "propdet/model_io.hpp"
#include "propdet/text.hpp"

namespace {

// 0 success, 1 runtime failure, 2 usage/config/input problem.
int dispatch(const std::function<int()>& action) {
  try {
    return action();
  } catch (const propdet::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const propdet::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const propdet::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const propdet::Utf8Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fine-grained propaganda detection toolkit"};
  app.require_subcommand(1);

  // gen-fixture
  std::string fx_out;
  int fx_articles = 10, fx_sentences = 3, fx_dim = 100;
  std::uint64_t fx_seed = 1;
  auto* gen = app.add_subcommand("gen-fixture",
                                 "generate a synthetic labeled corpus");
  gen->add_option("--out", fx_out, "output directory")->required();
  gen->add_option("--articles", fx_articles, "number of articles");
  gen->add_option("--sentences", fx_sentences, "sentences per article");
  gen->add_option("--seed", fx_seed, "generator seed");
  gen->add_option("--vector-dim", fx_dim, "word-vector dimension");

  // train-si
  std::string tsi_config, tsi_train, tsi_dev, tsi_out, tsi_vectors;
  auto* tsi = app.add_subcommand("train-si", "train the span tagger");
  tsi->add_option("--config", tsi_config, "config JSON")->required();
  tsi->add_option("--train-dir", tsi_train, "articles + .task1-SI labels")
      ->required();
  tsi->add_option("--dev-dir", tsi_dev, "optional dev directory");
  tsi->add_option("--out", tsi_out, "model bundle directory")->required();
  tsi->add_option("--vectors", tsi_vectors,
                  "word-vector file (default <train-dir>/vectors.txt)");

  // predict-si
  std::string psi_model, psi_articles, psi_out, psi_vectors;
  auto* psi = app.add_subcommand("predict-si", "tag articles with spans");
  psi->add_option("--model", psi_model, "model bundle directory")->required();
  psi->add_option("--articles", psi_articles, "article directory")->required();
  psi->add_option("--out", psi_out, "output TSV")->required();
  psi->add_option("--vectors", psi_vectors,
                  "word-vector file (default: path recorded in the bundle)");

  // score-si
  std::string ssi_gold, ssi_pred;
  auto* ssi = app.add_subcommand("score-si", "score span predictions");
  ssi->add_option("--gold", ssi_gold, "gold TSV")->required();
  ssi->add_option("--pred", ssi_pred, "prediction TSV")->required();

  // train-tc
  std::string ttc_config, ttc_train, ttc_out, ttc_vectors;
  bool ttc_mock = false;
  auto* ttc = app.add_subcommand("train-tc", "train the technique classifier");
  ttc->add_option("--config", ttc_config, "config JSON")->required();
  ttc->add_option("--train-dir", ttc_train, "articles + .task2-TC labels")
      ->required();
  ttc->add_option("--out", ttc_out, "model bundle directory")->required();
  ttc->add_option("--vectors", ttc_vectors,
                  "word-vector file for the table word source");
  ttc->add_flag("--mock-embeddings", ttc_mock,
                "use the deterministic offline embedding provider");

  // predict-tc
  std::string ptc_model, ptc_articles, ptc_spans, ptc_out;
  bool ptc_mock = false;
  auto* ptc = app.add_subcommand("predict-tc", "classify identified spans");
  ptc->add_option("--model", ptc_model, "model bundle directory")->required();
  ptc->add_option("--articles", ptc_articles, "article directory")->required();
  ptc->add_option("--spans", ptc_spans, "span TSV (SI format)")->required();
  ptc->add_option("--out", ptc_out, "output TSV")->required();
  ptc->add_flag("--mock-embeddings", ptc_mock,
                "force the deterministic offline embedding provider");

  // score-tc
  std::string stc_gold, stc_pred;
  auto* stc = app.add_subcommand("score-tc", "score technique predictions");
  stc->add_option("--gold", stc_gold, "gold TSV")->required();
  stc->add_option("--pred", stc_pred, "prediction TSV")->required();

  // compare
  std::string cmp_subtask, cmp_config, cmp_train, cmp_eval, cmp_out,
      cmp_vectors;
  std::vector<std::string> cmp_models;
  bool cmp_mock = false;
  auto* cmp = app.add_subcommand("compare",
                                 "train and score the model variants");
  cmp->add_option("--subtask", cmp_subtask, "si or tc")->required();
  cmp->add_option("--config", cmp_config, "config JSON")->required();
  cmp->add_option("--train-dir", cmp_train, "training data")->required();
  cmp->add_option("--eval-dir", cmp_eval, "evaluation data")->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--models", cmp_models,
                  "variant names (default: the full inventory)");
  cmp->add_option("--vectors", cmp_vectors, "word-vector file");
  cmp->add_flag("--mock-embeddings", cmp_mock,
                "use the deterministic offline embedding provider");

  // lr-sweep
  std::string lrs_subtask = "si", lrs_config, lrs_train, lrs_dev, lrs_out,
      lrs_vectors;
  std::vector<double> lrs_rates;
  int lrs_epochs = 0;
  bool lrs_mock = false;
  auto* lrs = app.add_subcommand("lr-sweep",
                                 "per-epoch dev scores across learning rates");
  lrs->add_option("--subtask", lrs_subtask, "si or tc");
  lrs->add_option("--config", lrs_config, "config JSON")->required();
  lrs->add_option("--train-dir", lrs_train, "training data")->required();
  lrs->add_option("--dev-dir", lrs_dev, "dev data")->required();
  lrs->add_option("--out", lrs_out, "output directory")->required();
  lrs->add_option("--rates", lrs_rates, "learning rates (two or more)")
      ->required();
  lrs->add_option("--epochs", lrs_epochs, "override the configured epochs");
  lrs->add_option("--vectors", lrs_vectors, "word-vector file");
  lrs->add_flag("--mock-embeddings", lrs_mock,
                "use the deterministic offline embedding provider");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  using namespace propdet;
  if (gen->parsed()) {
    return dispatch([&] {
      return cli::gen_fixture(fx_out, fx_articles, fx_sentences, fx_seed,
                              fx_dim);
    });
  }
  if (tsi->parsed()) {
    return dispatch([&] {
      return cli::train_si(tsi_config, tsi_train, tsi_dev, tsi_out,
                           tsi_vectors);
    });
  }
  if (psi->parsed()) {
    return dispatch([&] {
      return cli::predict_si(psi_model, psi_articles, psi_out, psi_vectors);
    });
  }
  if (ssi->parsed()) {
    return dispatch([&] { return cli::score_si_cmd(ssi_gold, ssi_pred); });
  }
  if (ttc->parsed()) {
    return dispatch([&] {
      return cli::train_tc(ttc_config, ttc_train, ttc_out, ttc_vectors,
                           ttc_mock);
    });
  }
  if (ptc->parsed()) {
    return dispatch([&] {
      return cli::predict_tc(ptc_model, ptc_articles, ptc_spans, ptc_out,
                             ptc_mock);
    });
  }
  if (stc->parsed()) {
    return dispatch([&] { return cli::score_tc_cmd(stc_gold, stc_pred); });
  }
  if (cmp->parsed()) {
    return dispatch([&] {
      return cli::compare(cmp_subtask, cmp_config, cmp_train, cmp_eval,
                          cmp_out, cmp_models, cmp_vectors, cmp_mock);
    });
  }
  if (lrs->parsed()) {
    return dispatch([&] {
      return cli::lr_sweep(lrs_subtask, lrs_config, lrs_train, lrs_dev,
                           lrs_out, lrs_rates, lrs_epochs, lrs_vectors,
                           lrs_mock);
    });
  }
  return 2;
}
