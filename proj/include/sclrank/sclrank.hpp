#pragma once

#include "augmentation.hpp"
#include "batching.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "corpus_io.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "log.hpp"
#include "losses.hpp"
#include "optimizer.hpp"
#include "rng.hpp"
#include "selector.hpp"
#include "synth.hpp"
#include "text.hpp"
#include "trainer.hpp"
#include "triples.hpp"
