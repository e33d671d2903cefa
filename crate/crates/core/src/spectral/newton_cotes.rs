//! Closed 13-node (12-interval) Newton–Cotes rule and composite integration.

use crate::error::{GtsError, Result};

/// Intervals per panel.
pub const Q: usize = 12;

const DENOM: f64 = 5_255_250.0;
const NUMER: [f64; Q + 1] = [
    1_364_651.0,
    9_903_168.0,
    -7_587_864.0,
    35_725_120.0,
    -51_491_295.0,
    87_516_288.0,
    -87_797_136.0,
    87_516_288.0,
    -51_491_295.0,
    35_725_120.0,
    -7_587_864.0,
    9_903_168.0,
    1_364_651.0,
];

/// Panel weights W_0..W_12; `h·Σ W_j g(x_j)` integrates over a panel of width 12h.
pub fn newton_cotes_weights() -> [f64; Q + 1] {
    NUMER.map(|w| w / DENOM)
}

/// Weight of node `node` (0..=m) in the composite rule over `m = 12n` intervals.
pub fn composite_weight(node: usize, m: usize) -> f64 {
    let j = node % Q;
    if j == 0 && node != 0 && node != m {
        2.0 * NUMER[0] / DENOM
    } else if node == m {
        NUMER[Q] / DENOM
    } else {
        NUMER[j] / DENOM
    }
}

/// `CUMULATIVE[b][j]` = ∫₀^b L_j(t) dt for the Lagrange basis on nodes 0..=12.
const CUMULATIVE: [[f64; 13]; 13] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        2.69028846773648800e-01,
        1.49790777920409623e+00,
        -2.52984271900479740e+00,
        5.14874902576281102e+00,
        -8.35358502641194178e+00,
        1.04559175310057011e+01,
        -1.00194456305011865e+01,
        7.28705330591751732e+00,
        -3.95538524273689829e+00,
        1.55364667328632700e+00,
        -4.17572225545067788e-01,
        6.87643755077410879e-02,
        -5.23669325795028499e-03,
    ],
    [
        2.63792153515698513e-01,
        1.83501363833109865e+00,
        -1.44039701392082353e+00,
        4.11660057853179584e+00,
        -6.94907168008358500e+00,
        8.84195672757577533e+00,
        -8.54969373013817524e+00,
        6.25377330605902060e+00,
        -3.40795615980139788e+00,
        1.34249710998388250e+00,
        -3.61619824032522463e-01,
        5.96542240827955123e-02,
        -4.54933010356290812e-03,
    ],
    [
        2.64479516670085846e-01,
        1.82084122406611248e+00,
        -1.04967682875160562e+00,
        5.00946042146097970e+00,
        -7.48975547192762559e+00,
        9.36183369420757749e+00,
        -8.98413936063936092e+00,
        6.54401003349329269e+00,
        -3.55659977996334042e+00,
        1.39846153753240809e+00,
        -3.76183525180176948e-01,
        6.19922995531254489e-02,
        -4.72376052147257478e-03,
    ],
    [
        2.64305086252176191e-01,
        1.82379618265332555e+00,
        -1.07745481561354572e+00,
        5.45006770615236213e+00,
        -6.72161337780385360e+00,
        9.04564185021327916e+00,
        -8.76358499114054723e+00,
        6.40888700012509549e+00,
        -3.49085500037880969e+00,
        1.37453566617587786e+00,
        -3.70106197153816208e-01,
        6.10341710024249681e-02,
        -4.65328048396831430e-03,
    ],
    [
        2.64375566289680453e-01,
        1.82270551174786055e+00,
        -1.06900241410100039e+00,
        5.40213242856420361e+00,
        -6.23061286629692468e+00,
        9.72307613606906784e+00,
        -8.95883309077753509e+00,
        6.50849762526659870e+00,
        -3.53527022547902403e+00,
        1.38988721894486189e+00,
        -3.73874777784127976e-01,
        6.16140561034534268e-02,
        -4.69516854711340449e-03,
    ],
    [
        2.64333678226535362e-01,
        1.82332053660625082e+00,
        -1.07336035393178242e+00,
        5.42256481613624430e+00,
        -6.30849810903382302e+00,
        1.02679865848437277e+01,
        -8.35327872127872162e+00,
        6.38512944198658516e+00,
        -3.48956953760525179e+00,
        1.37542195899338759e+00,
        -3.70503211074639627e-01,
        6.11127443984586863e-02,
        -4.65982826697112443e-03,
    ],
    [
        2.64369018506677655e-01,
        1.82281922490125625e+00,
        -1.06998878722229418e+00,
        5.40809955618477023e+00,
        -6.26279742116005167e+00,
        1.01446184015637133e+01,
        -7.74772435177990726e+00,
        6.93003989076124505e+00,
        -3.56745478034215013e+00,
        1.39585434656542873e+00,
        -3.74861150905421714e-01,
        6.17277692568491201e-02,
        -4.70171633011621463e-03,
    ],
    [
        2.64327130443532565e-01,
        1.82339911000228461e+00,
        -1.07375736785260600e+00,
        5.42345110895375448e+00,
        -6.30721264626026556e+00,
        1.02442290267052165e+01,
        -7.94297245141689601e+00,
        7.60747417661703373e+00,
        -3.07645426883522122e+00,
        1.34791906897726999e+00,
        -3.66408749392876376e-01,
        6.06370983513840681e-02,
        -4.63123629261195414e-03,
    ],
    [
        2.64397610481036827e-01,
        1.82244098145158406e+00,
        -1.06768003982624515e+00,
        5.39952523759722425e+00,
        -6.24146786667573483e+00,
        1.01091059933370193e+01,
        -7.72241808191808232e+00,
        7.29128233262273451e+00,
        -2.30831217471144923e+00,
        1.78852635366865287e+00,
        -3.94186736254816594e-01,
        6.35920569385971107e-02,
        -4.80566671052162081e-03,
    ],
    [
        2.64223180063127172e-01,
        1.82477905692191400e+00,
        -1.08224374097389964e+00,
        5.45548966514575007e+00,
        -6.39011148683767694e+00,
        1.03993427207712923e+01,
        -8.15686371241926800e+00,
        7.81115929925453756e+00,
        -2.84899596655549026e+00,
        2.68138619659783695e+00,
        -3.46655108559870478e-03,
        4.94196426736109307e-02,
        -4.11830355613424393e-03,
    ],
    [
        2.64910543217514505e-01,
        1.81566890549696858e+00,
        -1.02629133946135442e+00,
        5.24434010184330557e+00,
        -5.84268240390217652e+00,
        9.36606272091279557e+00,
        -6.68711181205625671e+00,
        6.19719849582461180e+00,
        -1.44448262022713281e+00,
        1.64923774936682088e+00,
        1.08597915399837519e+00,
        3.86525501800613402e-01,
        -9.35499681408452979e-03,
    ],
    [
        2.59673849959564218e-01,
        1.88443328100470953e+00,
        -1.44386356500642221e+00,
        6.79798677512963234e+00,
        -9.79806764663907437e+00,
        1.66531160268303111e+01,
        -1.67065574425574432e+01,
        1.66531160268303111e+01,
        -9.79806764663907437e+00,
        6.79798677512963234e+00,
        -1.44386356500642221e+00,
        1.88443328100470953e+00,
        2.59673849959564218e-01,
    ],
];

fn partial_sum(values: &[f64], row: usize, base: usize) -> f64 {
    (0..=Q)
        .map(|j| CUMULATIVE[row][j] * values[j] - CUMULATIVE[base][j] * values[j])
        .sum()
}

/// Running integral `∫_{x_0}^{x_i} g` at every node, for equally spaced samples.
///
/// Full panels are taken from the left; a trailing partial panel reuses the
/// last 13 nodes.
pub fn cumulative_integral(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let len = values.len();
    if len < Q + 1 {
        return Err(GtsError::Grid(format!(
            "cumulative Newton–Cotes integration needs at least {} nodes, got {len}",
            Q + 1
        )));
    }
    let mut out = vec![0.0; len];
    let full = (len - 1) / Q;
    for p in 0..full {
        let s = p * Q;
        let window = &values[s..=s + Q];
        for i in 1..=Q {
            out[s + i] = out[s] + h * partial_sum(window, i, 0);
        }
    }
    let done = full * Q;
    if done + 1 < len {
        let start = len - 1 - Q;
        let a = done - start;
        let window = &values[start..];
        for i in a + 1..=Q {
            out[start + i] = out[done] + h * partial_sum(window, i, a);
        }
    }
    Ok(out)
}

/// Composite integral over all samples.
pub fn integrate(values: &[f64], h: f64) -> Result<f64> {
    let len = values.len();
    if len >= Q + 1 && (len - 1) % Q == 0 {
        let m = len - 1;
        return Ok(h * values
            .iter()
            .enumerate()
            .map(|(i, v)| composite_weight(i, m) * v)
            .sum::<f64>());
    }
    Ok(*cumulative_integral(values, h)?.last().expect("nonempty"))
}
