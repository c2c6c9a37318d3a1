#pragma once

#include "dfs/pipeline.hpp"

// Preset weights with narrow nets, for tests that train on tiny_benchmark.
inline dfs::TrainConfig small_train_config(int epochs_afg = 30, int epochs_sfg = 30) {
  dfs::TrainConfig c = dfs::synthetic_preset();
  c.afg.aligned_dim = 4;
  c.afg.sem_encoder_hidden = {16};
  c.afg.sem_decoder_hidden = {16};
  c.afg.vis_encoder_hidden = {16};
  c.afg.vis_decoder_hidden = {16};
  c.afg.batch_size = 16;
  c.afg.epochs = epochs_afg;
  c.sfg.encoder_hidden = {16};
  c.sfg.decoder_hidden = {16};
  c.sfg.batch_size = 16;
  c.sfg.epochs = epochs_sfg;
  return c;
}
