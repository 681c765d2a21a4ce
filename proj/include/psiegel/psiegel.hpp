#pragma once

#include "psiegel/exactnum.hpp"
#include "psiegel/lambda.hpp"
#include "psiegel/genus.hpp"
#include "psiegel/fourier.hpp"
#include "psiegel/theta.hpp"
#include "psiegel/eisenstein.hpp"
#include "psiegel/padic.hpp"
