#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

//! Mittag-Leffler accuracy against a high-precision reference table and the
//! analytic properties used by the solvers.

use tfsolve::mittag_leffler::{ml, route, Route};
use tfsolve::special::gamma;

/// (alpha, beta, z, E_{alpha,beta}(z)) from an arbitrary-precision evaluation:
/// the Taylor series with enough working digits to absorb cancellation where
/// |z|^{1/alpha} <= 400, otherwise the optimally truncated asymptotic series
/// (remainder below 1e-25).
const REFERENCE: &[(f64, f64, f64, f64)] = &[
    (0.25, 1.0, -0.1, 0.89996132989886404654),
    (0.25, 1.0, -1.0, 0.46385276080171328694),
    (0.25, 1.0, -2.0, 0.29810179369365760367),
    (0.25, 1.0, -3.5, 0.19326848542426085093),
    (0.25, 1.0, -5.0, 0.14279894642587369523),
    (0.25, 1.0, -8.0, 0.093724110665607016969),
    (0.25, 1.0, -15.0, 0.051977231408360184762),
    (0.25, 1.0, -30.0, 0.026584961365091656998),
    (0.25, 1.0, -60.0, 0.013445372990850391285),
    (0.25, 1.0, -200.0, 0.0040661744322273281112),
    (0.25, 1.0, -1000.0, 0.00081548502533017432465),
    (0.25, 0.25, -0.1, 0.22665723253651745143),
    (0.25, 0.25, -1.0, 0.063822257579002721552),
    (0.25, 0.25, -2.0, 0.026817902578487835431),
    (0.25, 0.25, -3.5, 0.011365311801599844768),
    (0.25, 0.25, -5.0, 0.0062229193137905033015),
    (0.25, 0.25, -8.0, 0.0026864359461971193953),
    (0.25, 0.25, -15.0, 0.00082720350741218083074),
    (0.25, 0.25, -30.0, 0.00021648735946473948726),
    (0.25, 0.25, -60.0, 0.000055380027046498144111),
    (0.25, 0.25, -200.0, 5.0651733050326631435e-6),
    (0.25, 0.25, -1000.0, 2.0373034684428439727e-7),
    (0.25, 1.25, -0.1, 1.0003867010113595346),
    (0.25, 1.25, -1.0, 0.53614723919828671306),
    (0.25, 1.25, -2.0, 0.35094910315317119817),
    (0.25, 1.25, -3.5, 0.23049471845021118545),
    (0.25, 1.25, -5.0, 0.17144021071482526095),
    (0.25, 1.25, -8.0, 0.11328448616679912288),
    (0.25, 1.25, -15.0, 0.063201517906109321016),
    (0.25, 1.25, -30.0, 0.032447167954496944767),
    (0.25, 1.25, -60.0, 0.016442577116819160145),
    (0.25, 1.25, -200.0, 0.0049796691278388633594),
    (0.25, 1.25, -1000.0, 0.00099918451497466982568),
    (0.25, 0.5, -0.1, 0.49158430293691862931),
    (0.25, 0.5, -1.0, 0.21199340525120659281),
    (0.25, 0.5, -2.0, 0.12449888012586073946),
    (0.25, 0.5, -3.5, 0.075557243151031277026),
    (0.25, 0.5, -5.0, 0.053918548703283762212),
    (0.25, 0.5, -8.0, 0.034141153360501524371),
    (0.25, 0.5, -15.0, 0.018332563954853142235),
    (0.25, 0.5, -30.0, 0.0091866391823581524958),
    (0.25, 0.5, -60.0, 0.0045960047133860469369),
    (0.25, 0.5, -200.0, 0.0013790529882845214085),
    (0.25, 0.5, -1000.0, 0.00027581545909986247008),
    (0.25, 1.7, -0.1, 1.0068513956744177718),
    (0.25, 1.7, -1.0, 0.56501752892866691322),
    (0.25, 1.7, -2.0, 0.37791805041522623886),
    (0.25, 1.7, -3.5, 0.25201914048195316108),
    (0.25, 1.7, -5.0, 0.18892689256341836358),
    (0.25, 1.7, -8.0, 0.12584004146114937544),
    (0.25, 1.7, -15.0, 0.070705453756027696235),
    (0.25, 1.7, -30.0, 0.036461495608906391464),
    (0.25, 1.7, -60.0, 0.01852022345363637824),
    (0.25, 1.7, -200.0, 0.0056183911047651681227),
    (0.25, 1.7, -1000.0, 0.0011280115457085925354),
    (0.5, 1.0, -0.1, 0.89645697996912664193),
    (0.5, 1.0, -1.0, 0.42758357615580700441),
    (0.5, 1.0, -2.0, 0.25539567631050574387),
    (0.5, 1.0, -3.5, 0.1552936556088942974),
    (0.5, 1.0, -5.0, 0.11070463773306862637),
    (0.5, 1.0, -8.0, 0.069985166200880927723),
    (0.5, 1.0, -15.0, 0.037529606388505765746),
    (0.5, 1.0, -30.0, 0.018795888861416751497),
    (0.5, 1.0, -60.0, 0.0094018542751763885888),
    (0.5, 1.0, -200.0, 0.0028209126572120463987),
    (0.5, 1.0, -1000.0, 0.0005641893014533876542),
    (0.5, 0.5, -0.1, 0.47454388555084362275),
    (0.5, 0.5, -1.0, 0.13660600739194928254),
    (0.5, 0.5, -2.0, 0.053398230926744799218),
    (0.5, 0.5, -3.5, 0.020661788916626246039),
    (0.5, 0.5, -5.0, 0.010666394882413155097),
    (0.5, 0.5, -8.0, 0.0043082539407088651661),
    (0.5, 0.5, -15.0, 0.0012454877201698007572),
    (0.5, 0.5, -30.0, 0.00031291770525374203432),
    (0.5, 0.5, -60.0, 0.000078327037172971621703),
    (0.5, 0.5, -200.0, 7.0521053470072111575e-6),
    (0.5, 0.5, -1000.0, 2.8209436863274833442e-7),
    (0.5, 1.5, -0.1, 1.0354302003087335807),
    (0.5, 1.5, -1.0, 0.57241642384419299559),
    (0.5, 1.5, -2.0, 0.37230216184474712807),
    (0.5, 1.5, -3.5, 0.24134466982603020074),
    (0.5, 1.5, -5.0, 0.17785907245338627473),
    (0.5, 1.5, -8.0, 0.11625185422488988403),
    (0.5, 1.5, -15.0, 0.06416469290743294895),
    (0.5, 1.5, -30.0, 0.032706803704619441617),
    (0.5, 1.5, -60.0, 0.016509969095413726857),
    (0.5, 1.5, -200.0, 0.004985895436713939768),
    (0.5, 1.5, -1000.0, 0.00099943581069854661235),
    (0.5, 0.5, -0.1, 0.47454388555084362275),
    (0.5, 0.5, -1.0, 0.13660600739194928254),
    (0.5, 0.5, -2.0, 0.053398230926744799218),
    (0.5, 0.5, -3.5, 0.020661788916626246039),
    (0.5, 0.5, -5.0, 0.010666394882413155097),
    (0.5, 0.5, -8.0, 0.0043082539407088651661),
    (0.5, 0.5, -15.0, 0.0012454877201698007572),
    (0.5, 0.5, -30.0, 0.00031291770525374203432),
    (0.5, 0.5, -60.0, 0.000078327037172971621703),
    (0.5, 0.5, -200.0, 7.0521053470072111575e-6),
    (0.5, 0.5, -1000.0, 2.8209436863274833442e-7),
    (0.5, 1.7, -0.1, 1.0158710479641616403),
    (0.5, 1.7, -1.0, 0.58234985229015789751),
    (0.5, 1.7, -2.0, 0.38658168737812248852),
    (0.5, 1.7, -3.5, 0.25447995347096775823),
    (0.5, 1.7, -5.0, 0.18905213968830384698),
    (0.5, 1.7, -8.0, 0.12457889763052929085),
    (0.5, 1.7, -15.0, 0.069253221639841851806),
    (0.5, 1.7, -30.0, 0.035456511400631777576),
    (0.5, 1.7, -60.0, 0.017939104406512593092),
    (0.5, 1.7, -200.0, 0.005426389897703158863),
    (0.5, 1.7, -1000.0, 0.0010883542559302943486),
    (0.75, 1.0, -0.1, 0.89833981373612592004),
    (0.75, 1.0, -1.0, 0.39310830281575406177),
    (0.75, 1.0, -2.0, 0.20207848341295445435),
    (0.75, 1.0, -3.5, 0.10443422814561072504),
    (0.75, 1.0, -5.0, 0.067923974332643942122),
    (0.75, 1.0, -8.0, 0.039335854041138190969),
    (0.75, 1.0, -15.0, 0.019715347028239016242),
    (0.75, 1.0, -30.0, 0.0095166926931171288816),
    (0.75, 1.0, -60.0, 0.0046764666421501242571),
    (0.75, 1.0, -200.0, 0.0013861625576875998699),
    (0.75, 1.0, -1000.0, 0.00027609801263627742813),
    (0.75, 0.75, -0.1, 0.71155890061785484438),
    (0.75, 0.75, -1.0, 0.23223772010096143194),
    (0.75, 0.75, -2.0, 0.084363572245660564019),
    (0.75, 0.75, -3.5, 0.02715172322588632685),
    (0.75, 0.75, -5.0, 0.012140520971468211535),
    (0.75, 0.75, -8.0, 0.0041752734124672942406),
    (0.75, 0.75, -15.0, 0.0010556553297295078871),
    (0.75, 0.75, -30.0, 0.00024622074958261615934),
    (0.75, 0.75, -60.0, 0.000059464775307090631607),
    (0.75, 0.75, -200.0, 5.224795007131185606e-6),
    (0.75, 0.75, -1000.0, 2.0728546309097819553e-7),
    (0.75, 1.75, -0.1, 1.0166018626387407996),
    (0.75, 1.75, -1.0, 0.60689169718424593823),
    (0.75, 1.75, -2.0, 0.39896075829352277283),
    (0.75, 1.75, -3.5, 0.25587593481553979284),
    (0.75, 1.75, -5.0, 0.18641520513347121158),
    (0.75, 1.75, -8.0, 0.12008301824485772613),
    (0.75, 1.75, -15.0, 0.065352310198117398917),
    (0.75, 1.75, -30.0, 0.033016110243562762371),
    (0.75, 1.75, -60.0, 0.016588725555964164596),
    (0.75, 1.75, -200.0, 0.0049930691872115620007),
    (0.75, 1.75, -1000.0, 0.00099972390198736372257),
    (0.75, 0.5, -0.1, 0.46327049039722020769),
    (0.75, 0.5, -1.0, 0.051122822536413962982),
    (0.75, 0.5, -2.0, -0.034563686662314401974),
    (0.75, 0.5, -3.5, -0.043522262481739908343),
    (0.75, 0.5, -5.0, -0.036034073628165468138),
    (0.75, 0.5, -8.0, -0.02449398921375743593),
    (0.75, 0.5, -15.0, -0.013470347732794203622),
    (0.75, 0.5, -30.0, -0.0067856183481917038036),
    (0.75, 0.5, -60.0, -0.0033984439337885269035),
    (0.75, 0.5, -200.0, -0.0010200152558799011814),
    (0.75, 0.5, -1000.0, -0.00020401187170678802996),
    (0.75, 1.7, -0.1, 1.026632804140522977),
    (0.75, 1.7, -1.0, 0.60577241676684217291),
    (0.75, 1.7, -2.0, 0.39491304950385720012),
    (0.75, 1.7, -3.5, 0.25150890600042419971),
    (0.75, 1.7, -5.0, 0.18255252841413471339),
    (0.75, 1.7, -8.0, 0.11716804750917991865),
    (0.75, 1.7, -15.0, 0.063576842064850216197),
    (0.75, 1.7, -30.0, 0.032064109310304892846),
    (0.75, 1.7, -60.0, 0.016096606460958191472),
    (0.75, 1.7, -200.0, 0.0048420483872926913835),
    (0.75, 1.7, -1000.0, 0.00096928772116564632143),
    (0.9, 1.0, -0.1, 0.90175694244985940329),
    (0.9, 1.0, -1.0, 0.37606602142464188118),
    (0.9, 1.0, -2.0, 0.16352830001693004885),
    (0.9, 1.0, -3.5, 0.063854273735752437051),
    (0.9, 1.0, -5.0, 0.034431324804098423905),
    (0.9, 1.0, -8.0, 0.017095144580796809367),
    (0.9, 1.0, -15.0, 0.0079286024323444488278),
    (0.9, 1.0, -30.0, 0.0037137076984598529581),
    (0.9, 1.0, -60.0, 0.0018022340312846149897),
    (0.9, 1.0, -200.0, 0.00052997543888320925892),
    (0.9, 1.0, -1000.0, 0.00010528835943209591488),
    (0.9, 0.9, -0.1, 0.83462474715172490182),
    (0.9, 0.9, -1.0, 0.30814879777662194201),
    (0.9, 0.9, -2.0, 0.1105980242932084808),
    (0.9, 0.9, -3.5, 0.029189505154338619758),
    (0.9, 0.9, -5.0, 0.010212790452992133754),
    (0.9, 0.9, -8.0, 0.0025808143045736159232),
    (0.9, 0.9, -15.0, 0.00054199570979589930344),
    (0.9, 0.9, -30.0, 0.00011825044794307209151),
    (0.9, 0.9, -60.0, 0.000027819057608177369604),
    (0.9, 0.9, -200.0, 2.4049509296826036505e-6),
    (0.9, 0.9, -1000.0, 9.4917076469339176804e-8),
    (0.9, 1.9, -0.1, 0.98243057550140596713),
    (0.9, 1.9, -1.0, 0.62393397857535811882),
    (0.9, 1.9, -2.0, 0.41823584999153497557),
    (0.9, 1.9, -3.5, 0.26747020750407073227),
    (0.9, 1.9, -5.0, 0.19311373503918031522),
    (0.9, 1.9, -8.0, 0.12286310692740039883),
    (0.9, 1.9, -15.0, 0.066138093171177036745),
    (0.9, 1.9, -30.0, 0.033209543076718004901),
    (0.9, 1.9, -60.0, 0.016636629432811923084),
    (0.9, 1.9, -200.0, 0.0049973501228055839537),
    (0.9, 1.9, -1000.0, 0.00099989471164056790409),
    (0.9, 0.5, -0.1, 0.45965635448400752719),
    (0.9, 0.5, -1.0, -0.0050172483148519384521),
    (0.9, 0.5, -2.0, -0.10282482036797025084),
    (0.9, 0.5, -3.5, -0.091494234770287145571),
    (0.9, 0.5, -5.0, -0.066346276353700427973),
    (0.9, 0.5, -8.0, -0.039126298925561750061),
    (0.9, 0.5, -15.0, -0.019387796675147187636),
    (0.9, 0.5, -30.0, -0.0093048372839245566808),
    (0.9, 0.5, -60.0, -0.004562309072931306072),
    (0.9, 0.5, -200.0, -0.0013505782894263855749),
    (0.9, 0.5, -1000.0, -0.00026890289260738454179),
    (0.9, 1.7, -0.1, 1.0335118930415507002),
    (0.9, 1.7, -1.0, 0.62464511654730404275),
    (0.9, 1.7, -2.0, 0.40158460628219874822),
    (0.9, 1.7, -3.5, 0.24683720995266271173),
    (0.9, 1.7, -5.0, 0.17437453287135840291),
    (0.9, 1.7, -8.0, 0.10872594066907894036),
    (0.9, 1.7, -15.0, 0.057673151415232073452),
    (0.9, 1.7, -30.0, 0.028734944866776045744),
    (0.9, 1.7, -60.0, 0.01434159574937871868),
    (0.9, 1.7, -200.0, 0.004297024427777174206),
    (0.9, 1.7, -1000.0, 0.00085903059691613205906),
    (0.99, 1.0, -0.1, 0.90450358812369841348),
    (0.99, 1.0, -1.0, 0.36854831806033961629),
    (0.99, 1.0, -2.0, 0.13821728069806402584),
    (0.99, 1.0, -3.5, 0.033857644161863976035),
    (0.99, 1.0, -5.0, 0.0097680921391741255086),
    (0.99, 1.0, -8.0, 0.0020917316290584047443),
    (0.99, 1.0, -15.0, 0.00078316696851676135818),
    (0.99, 1.0, -30.0, 0.0003597560516821720766),
    (0.99, 1.0, -60.0, 0.0001734126143051652045),
    (0.99, 1.0, -200.0, 0.000050788286036312322319),
    (0.99, 1.0, -1000.0, 0.00001007694492000442879),
    (0.99, 0.99, -0.1, 0.89829482769816364791),
    (0.99, 0.99, -1.0, 0.36159131535572008744),
    (0.99, 0.99, -2.0, 0.13250045921585249905),
    (0.99, 0.99, -3.5, 0.030072257649225657025),
    (0.99, 0.99, -5.0, 0.0071895423030289530632),
    (0.99, 0.99, -8.0, 0.00062269988269064594997),
    (0.99, 0.99, -15.0, 0.000061719048910468290216),
    (0.99, 0.99, -30.0, 0.000012777095829753515026),
    (0.99, 0.99, -60.0, 2.9620367287004233896e-6),
    (0.99, 0.99, -200.0, 2.539291926728953222e-7),
    (0.99, 0.99, -1000.0, 9.9959144665478066134e-9),
    (0.99, 1.99, -0.1, 0.95496411876301586517),
    (0.99, 1.99, -1.0, 0.63145168193966038371),
    (0.99, 1.99, -2.0, 0.43089135965096798708),
    (0.99, 1.99, -3.5, 0.27604067309661029256),
    (0.99, 1.99, -5.0, 0.1980463815721651749),
    (0.99, 1.99, -8.0, 0.12473853354636769941),
    (0.99, 1.99, -15.0, 0.066614455535432215909),
    (0.99, 1.99, -30.0, 0.033321341464943927597),
    (0.99, 1.99, -60.0, 0.016663776456428247247),
    (0.99, 1.99, -200.0, 0.0049997460585698184384),
    (0.99, 1.99, -1000.0, 0.00099998992305507999557),
    (0.99, 0.5, -0.1, 0.45864199490451320994),
    (0.99, 0.5, -1.0, -0.039204316634988055477),
    (0.99, 0.5, -2.0, -0.15205607144621257084),
    (0.99, 0.5, -3.5, -0.12733074827894989167),
    (0.99, 0.5, -5.0, -0.086247133680177150507),
    (0.99, 0.5, -8.0, -0.045500504559052266617),
    (0.99, 0.5, -15.0, -0.021045954775315674376),
    (0.99, 0.5, -30.0, -0.0099010539107213941704),
    (0.99, 0.5, -60.0, -0.0048184538328488972319),
    (0.99, 0.5, -200.0, -0.0014198705767912419927),
    (0.99, 0.5, -1000.0, -0.00028228341481300692053),
    (0.99, 1.7, -0.1, 1.0376808792943373261),
    (0.99, 1.7, -1.0, 0.63820401531405007985),
    (0.99, 1.7, -2.0, 0.40716426522756020638),
    (0.99, 1.7, -3.5, 0.24306331624071167591),
    (0.99, 1.7, -5.0, 0.16739558784744104438),
    (0.99, 1.7, -8.0, 0.10167401769521324761),
    (0.99, 1.7, -15.0, 0.053060211520482001994),
    (0.99, 1.7, -30.0, 0.026247418700510254905),
    (0.99, 1.7, -60.0, 0.013058179101548386433),
    (0.99, 1.7, -200.0, 0.0039042070820119131938),
    (0.99, 1.7, -1000.0, 0.00077995112502329677101),
];

#[test]
fn matches_reference_table() {
    let mut worst = (0.0f64, 0.0, 0.0, 0.0);
    for &(a, b, z, want) in REFERENCE {
        let got = ml(a, b, z).unwrap();
        let rel = ((got - want) / want).abs();
        // 1e-10 everywhere except the series/integral crossover band.
        let tol = match route(a, b, z).unwrap() {
            Route::Integral => 1e-8,
            _ => 1e-10,
        };
        assert!(
            rel <= tol,
            "E_({a},{b})({z}) = {got:e}, want {want:e}, rel {rel:e}"
        );
        if rel > worst.0 {
            worst = (rel, a, b, z);
        }
    }
    eprintln!(
        "worst relative error {:e} at alpha={} beta={} z={}",
        worst.0, worst.1, worst.2, worst.3
    );
    assert!(worst.0 < 1e-10);
}

/// Independent oracle: 500-term series with Neumaier summation and statrs' Γ.
fn series_oracle(alpha: f64, beta: f64, z: f64) -> f64 {
    series_oracle_with_mass(alpha, beta, z).0
}

/// Also returns `Σ|term|`, which bounds the cancellation in the sum.
fn series_oracle_with_mass(alpha: f64, beta: f64, z: f64) -> (f64, f64) {
    let (mut sum, mut carry, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..500 {
        let g = statrs::function::gamma::gamma(alpha * k as f64 + beta);
        if !g.is_finite() {
            break;
        }
        let term = z.powi(k) / g;
        mass += term.abs();
        let t = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    (sum + carry, mass)
}

#[test]
fn exponential_and_erfc_closed_forms() {
    assert!((ml(1.0, 1.0, -1.0).unwrap() - (-1f64).exp()).abs() < 1e-12);
    assert!((ml(1.0, 1.0, -1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-12);

    // E_{1/2,1}(-1) = e * erfc(1)
    let oracle = series_oracle(0.5, 1.0, -1.0);
    assert!((oracle - 0.427_583_576_155_807_0).abs() < 1e-14, "{oracle}");
    let got = ml(0.5, 1.0, -1.0).unwrap();
    assert!((got - oracle).abs() < 1e-12);
    assert!((got - 0.427_583_576_155_807_0).abs() < 1e-12);
}

#[test]
fn series_oracle_agrees_in_series_region() {
    for (alpha, beta) in [(0.5, 1.0), (0.3, 0.3), (0.8, 1.8), (0.6, 1.7)] {
        for z in [-0.2, -0.9, -1.4] {
            let (want, mass) = series_oracle_with_mass(alpha, beta, z);
            let got = ml(alpha, beta, z).unwrap();
            // statrs' Γ carries ~1e-13 relative error per term.
            assert!(
                (got - want).abs() < 1e-12 * mass,
                "({alpha},{beta},{z}): {got} vs {want}"
            );
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn completely_monotone_beta_one() {
    for alpha in [0.25, 0.5, 0.75] {
        let ts = log_grid(1e-3, 100.0, 400);
        let vals: Vec<f64> = ts.iter().map(|&t| ml(alpha, 1.0, -t).unwrap()).collect();
        for (t, v) in ts.iter().zip(&vals) {
            assert!(*v > 0.0 && *v < 1.0, "alpha={alpha} t={t}: {v}");
        }
        for w in vals.windows(2) {
            assert!(w[1] <= w[0], "not decreasing for alpha={alpha}");
        }
        // Convexity on a uniform grid: second differences are nonnegative.
        let us: Vec<f64> = (0..=400).map(|i| 0.25 * i as f64).collect();
        let u: Vec<f64> = us.iter().map(|&t| ml(alpha, 1.0, -t).unwrap()).collect();
        for w in u.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-15, "alpha={alpha}: {w:?}");
        }
    }
}

#[test]
fn beta_equals_alpha_bounds() {
    for alpha in [0.25, 0.5, 0.75] {
        let cap = 1.0 / gamma(alpha);
        let mut prev = f64::INFINITY;
        for eta in log_grid(1e-3, 100.0, 400) {
            let v = ml(alpha, alpha, -eta).unwrap();
            assert!(v >= 0.0 && v <= cap, "alpha={alpha} eta={eta}: {v}");
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}

#[test]
fn time_derivative_identity() {
    // d/dt E_{α,1}(-λ t^α) = -λ t^{α-1} E_{α,α}(-λ t^α)
    for alpha in [0.3, 0.5, 0.8] {
        for lambda in [0.5, 3.0, 40.0] {
            for t in [0.05, 0.3, 1.0, 2.5] {
                let e = |s: f64| ml(alpha, 1.0, -lambda * s.powf(alpha)).unwrap();
                let h = 1e-5 * t;
                let fd = (e(t + h) - e(t - h)) / (2.0 * h);
                let exact = -lambda
                    * t.powf(alpha - 1.0)
                    * ml(alpha, alpha, -lambda * t.powf(alpha)).unwrap();
                assert!(
                    ((fd - exact) / exact).abs() < 1e-5,
                    "a={alpha} l={lambda} t={t}"
                );
            }
        }
    }
}

#[test]
fn shifted_beta_identity() {
    // E_{α,α+1}(z) = (E_{α,1}(z) - 1)/z
    for alpha in [0.25, 0.5, 0.75, 0.9] {
        for z in [-0.05, -0.9, -3.0, -7.0, -20.0, -150.0] {
            let lhs = ml(alpha, alpha + 1.0, z).unwrap();
            let rhs = (ml(alpha, 1.0, z).unwrap() - 1.0) / z;
            assert!(
                (lhs - rhs).abs() < 1e-9,
                "alpha={alpha} z={z}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn algebraic_decay_shape() {
    // |E_{α,β}(-x)| <= C/(1+x) with a constant fitted over a wide range.
    for (alpha, beta) in [
        (0.5, 1.0),
        (0.5, 0.5),
        (0.25, 1.0),
        (0.75, 1.0),
        (0.75, 1.3),
    ] {
        let c = log_grid(1e-2, 1e5, 300)
            .into_iter()
            .map(|x| ml(alpha, beta, -x).unwrap().abs() * (1.0 + x))
            .fold(0.0f64, f64::max);
        assert!(
            c.is_finite() && c < 10.0,
            "alpha={alpha} beta={beta}: C={c}"
        );
    }
    // Batched entries at λ = 1e4, t = 1, α = 1/2 stay under 10/(1+λ).
    let v = ml(0.5, 1.0, -1e4).unwrap();
    assert!(v <= 10.0 / (1.0 + 1e4));
    assert!((v - series_asymptote(1e4)).abs() < 1e-12);
}

fn series_asymptote(x: f64) -> f64 {
    // e^{x^2} erfc(x) ~ 1/(x√π) (1 - 1/(2x²) + 3/(4x⁴))
    let s = std::f64::consts::PI.sqrt();
    (1.0 - 0.5 / (x * x) + 0.75 / x.powi(4)) / (x * s)
}
