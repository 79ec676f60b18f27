#pragma once

#include "dsqa/errors.hpp"
#include "dsqa/corpus.hpp"
#include "dsqa/evalkit.hpp"
#include "dsqa/weak_labeler.hpp"
#include "dsqa/prob_space.hpp"
#include "dsqa/objectives.hpp"
#include "dsqa/inference.hpp"
#include "dsqa/scorer.hpp"
#include "dsqa/trainer.hpp"
#include "dsqa/synthlab.hpp"
#include "dsqa/selfcheck.hpp"
