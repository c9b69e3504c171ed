//! Object-identifier resolution for the dump command.

use agm_core::connection::{curvature, curvature_family, ricci, ricci_family, Connection};
use agm_core::grid::TensorGrid;
use agm_core::invariants::{
    big_theta_ordered, pi3_family, pi3_scalar, pi3_thomas, pi3_weyl_assoc, pi3_weyl_dd,
    pi3_weyl_ddd, pi3_weyl_derived, pi3_weyl_reduced, pi3_xyz, theta, thomas_assoc, thomas_reduced,
    thomas_torsion, weyl_assoc, weyl_derived, weyl_family, weyl_rho_sigma, GeneralSide,
    Pi3FamilyBase, Pi3Side, ThetaOrder, ThetaSelector,
};
use agm_core::mapping::{
    derive_barred_data_unchecked, pi3_sym_deformation, rho_pi3, sigma_hat_pi3, Pi3Kind,
};

use crate::scenario::{Scenario, ScenarioData};
use crate::AppError;

const VALID_IDS: &str = "R, Ricci, K, Kij, L_sym, L_anti, T_assoc, W_assoc, T_red, W_rs, W_der, \
T_tor, theta[p1p2p3], Theta_jmn, Theta_jnm, Theta_mnj, W_fam[sel1,sel2], pi3_T, pi3_Wc, pi3_Wd, \
pi3_Wred, pi3_X, pi3_Y, pi3_Z, pi3_Wdd, pi3_Wddd, pi3_s, pi3_calW[sel1,sel2], pi3_W[sel1,sel2] \
(selectors are triples over {1,2}, e.g. theta[121] or pi3_W[121,212])";

fn unknown(object: &str) -> AppError {
    AppError(format!(
        "unknown object {object:?}; valid identifiers: {VALID_IDS}"
    ))
}

fn parse_selector(s: &str, object: &str) -> Result<ThetaSelector, AppError> {
    let digits: Vec<u8> = s
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as u8))
        .collect::<Option<_>>()
        .ok_or_else(|| unknown(object))?;
    if digits.len() != 3 {
        return Err(unknown(object));
    }
    ThetaSelector::new(digits[0], digits[1], digits[2]).map_err(|_| unknown(object))
}

fn parse_selector_pair(s: &str, object: &str) -> Result<(ThetaSelector, ThetaSelector), AppError> {
    let (a, b) = s.split_once(',').ok_or_else(|| unknown(object))?;
    Ok((
        parse_selector(a.trim(), object)?,
        parse_selector(b.trim(), object)?,
    ))
}

fn bracket<'a>(id: &'a str, prefix: &str) -> Option<&'a str> {
    id.strip_prefix(prefix)
        .and_then(|rest| rest.strip_prefix('['))
        .and_then(|rest| rest.strip_suffix(']'))
}

/// The side data a dump evaluates on: a connection plus the section-2 gauge
/// (omega, tau) plus, for third-type scenarios, the subtype data.
struct DumpSide {
    conn: Connection,
    omega: TensorGrid,
    tau: TensorGrid,
    pi3: Option<Pi3Side>,
}

fn general_side(
    sc: &Scenario,
    d: &agm_core::mapping::GeneralMappingData,
    barred: bool,
) -> Result<DumpSide, AppError> {
    let side = if barred {
        GeneralSide::barred(&sc.connection, d).map_err(|e| AppError(e.to_string()))?
    } else {
        GeneralSide::unbarred(&sc.connection, d)
    };
    Ok(DumpSide {
        conn: side.conn,
        omega: side.omega,
        tau: side.tau,
        pi3: None,
    })
}

fn pi3_side(
    sc: &Scenario,
    m: &agm_core::mapping::Pi3MappingData,
    barred: bool,
) -> Result<DumpSide, AppError> {
    let l_bar = Connection::new(sc.connection.coefficients().add(&pi3_sym_deformation(m)))
        .map_err(|e| AppError(e.to_string()))?;
    let side = if barred {
        let data = derive_barred_data_unchecked(m, &l_bar);
        Pi3Side::barred(&data, m.kind)
    } else {
        Pi3Side::unbarred(&sc.connection, m)
    };
    let omega = side.omega();
    let tau = TensorGrid::zero(sc.dimension, side.conn.coefficients().variance());
    Ok(DumpSide {
        conn: side.conn.clone(),
        omega,
        tau,
        pi3: Some(side),
    })
}

pub fn resolve_object(sc: &Scenario, object: &str, barred: bool) -> Result<TensorGrid, AppError> {
    let side = match &sc.data {
        ScenarioData::General(d) => general_side(sc, d, barred)?,
        ScenarioData::Pi3(m) => pi3_side(sc, m, barred)?,
    };
    let fc = &sc.family_coefficients;

    // curvature objects and connection parts work for every scenario type
    match object {
        "R" => return Ok(curvature(&side.conn)),
        "Ricci" => return Ok(ricci(&side.conn)),
        "K" => return Ok(curvature_family(&side.conn, fc)),
        "Kij" => return Ok(ricci_family(&side.conn, fc)),
        "L_sym" => return Ok(side.conn.sym()),
        "L_anti" => return Ok(side.conn.anti()),
        "T_assoc" => return Ok(thomas_assoc(&side.conn, &side.omega)),
        "W_assoc" => return Ok(weyl_assoc(&side.conn, &side.omega)),
        "T_tor" => return Ok(thomas_torsion(&side.conn, &side.tau)),
        "Theta_jmn" => return Ok(big_theta_ordered(&side.conn, &side.tau, ThetaOrder::Jmn)),
        "Theta_jnm" => return Ok(big_theta_ordered(&side.conn, &side.tau, ThetaOrder::Jnm)),
        "Theta_mnj" => return Ok(big_theta_ordered(&side.conn, &side.tau, ThetaOrder::Mnj)),
        _ => {}
    }
    if let Some(sel) = bracket(object, "theta") {
        let sel = parse_selector(sel, object)?;
        return Ok(theta(&side.conn, &side.omega, &side.tau, sel));
    }
    if let Some(pair) = bracket(object, "W_fam") {
        let (s1, s2) = parse_selector_pair(pair, object)?;
        return Ok(weyl_family(&side.conn, &side.omega, &side.tau, fc, s1, s2));
    }

    // the reduced-gauge and third-type objects need subtype data
    let known_pi3 = matches!(
        object,
        "T_red"
            | "W_rs"
            | "W_der"
            | "pi3_T"
            | "pi3_Wc"
            | "pi3_Wd"
            | "pi3_Wred"
            | "pi3_X"
            | "pi3_Y"
            | "pi3_Z"
            | "pi3_Wdd"
            | "pi3_Wddd"
            | "pi3_s"
    ) || bracket(object, "pi3_calW").is_some()
        || bracket(object, "pi3_W").is_some();
    if !known_pi3 {
        return Err(unknown(object));
    }
    let pi3 = side.pi3.as_ref().ok_or_else(|| {
        AppError(format!(
            "object {object:?} requires a pi3 scenario; this file holds a general mapping"
        ))
    })?;
    let sigma_hat = sigma_hat_pi3(&pi3.sigma, &pi3.phi);
    match object {
        "T_red" => return Ok(thomas_reduced(&pi3.conn, &sigma_hat)),
        "W_rs" => {
            let rho = rho_pi3(&pi3.conn, &pi3.sigma, &pi3.phi);
            return Ok(weyl_rho_sigma(&pi3.conn, &rho, &sigma_hat));
        }
        "W_der" => return Ok(weyl_derived(&pi3.conn, &sigma_hat)),
        "pi3_T" => return Ok(pi3_thomas(pi3)),
        "pi3_Wc" => return Ok(pi3_weyl_assoc(pi3)),
        "pi3_Wd" => return Ok(pi3_weyl_derived(pi3)),
        "pi3_Wred" => return Ok(pi3_weyl_reduced(pi3)),
        _ => {}
    }
    if let Some(pair) = bracket(object, "pi3_calW") {
        let (s1, s2) = parse_selector_pair(pair, object)?;
        return Ok(pi3_family(pi3, fc, s1, s2, Pi3FamilyBase::Assoc));
    }
    if let Some(pair) = bracket(object, "pi3_W") {
        let (s1, s2) = parse_selector_pair(pair, object)?;
        return Ok(pi3_family(pi3, fc, s1, s2, Pi3FamilyBase::Derived));
    }

    // subtype-1 contracted chain
    let needs_k1 = matches!(
        object,
        "pi3_X" | "pi3_Y" | "pi3_Z" | "pi3_Wdd" | "pi3_Wddd" | "pi3_s"
    );
    if needs_k1 {
        if pi3.kind != Pi3Kind::K1 {
            return Err(AppError(format!(
                "object {object:?} is derived for subtype 1 only; this scenario is subtype 2"
            )));
        }
        return Ok(match object {
            "pi3_X" => pi3_xyz(pi3).0,
            "pi3_Y" => pi3_xyz(pi3).1,
            "pi3_Z" => pi3_xyz(pi3).2,
            "pi3_Wdd" => pi3_weyl_dd(pi3),
            "pi3_Wddd" => pi3_weyl_ddd(pi3),
            _ => pi3_scalar(pi3),
        });
    }
    Err(unknown(object))
}
