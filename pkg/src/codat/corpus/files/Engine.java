  
public class Engine {
    //OVERVIEW: An engine has a state as follows:
    //1. A collection of documents to be searched, which is an implicit input for all methods.
    //   Documents can be added to the collection.
    //   Each document consists of a title and a body. Each of these is a sequence of words.
    //   A word is an alphabetic string.
    //2. A sequence of keywords, each resulting from a sequence of submitted queries.
    //3. A list of documents matching all of the keywords (ie. every keyword occurs
    // at least once in every match) and
    //   sorted by total number of occurrences of all keywords.
    //4. A private file ("uninteresting.txt") in the same directory contains the
    // uninteresting words.
    //
    //   Methods throw the NotPossibleException when there is a problem.
    //   For efficient search, documents are maintained in summarized form.


    private WordTable wt; //Summarizes the documents for fast search
    private TitleTable tt; //Enables lookup of documents by title
    private Query q;
    //  private String urls; //WILL IGNORE URLS IN PROTOTYPE SINCE WE READ DOCS FROM FILES


    //CONSTRUCTORS

    public Engine()   throws NotPossibleException, FileNotFoundException {
        //EFFECTS: If the uninteresting words cannot be read from the private file
        //throws NotPossibleException, else creates NK and initializes the
        //application state appropriately.

        //IMPL SKETCH:
        //wt := WordTable()
        //tt := TitleTable()
        //q := null
        //urls is initially empty.

        wt = new WordTable();
        tt = new TitleTable();
        q = null;

    }



    //METHODS

    public Query queryFirst(String w) throws NotPossibleException {
        //EFFECTS: If w = null or not WORD(w) or w in NK throws
        //NotPossibleException else
        //sets Key = {w}, performs the query, and returns the result.

        //IMPL SKETCH:
        //if precondition is false then raise exception else q := new Query(wt, w)

        if (!wt.isInteresting(w)) throw new NotPossibleException("Engine.queryFirst");
        else {
            q = new Query(wt, w);
            return q;
        }

    }


    public Query queryMore(String  w) throws  NotPossibleException {
        //EFFECTS: If  w = null or not WORD(w) or w in NK or
        //   Key = emptyset or w in Key throws NotPossibleException,
        //   else adds w to Key and returns the query result.
        //IMPL SKETCH:
        //if precondition is false raise exception else
        //     add w to keys[]
        //     q := q.addKey(w)

        if (!wt.isInteresting(w) ) throw new NotPossibleException("Engine.queryMore");  

        String[] keys = q.keys();

        if (keys.length == 0) throw new NotPossibleException("Engine.queryMore"); 
        //Key = emptyset
        //{WORD(w) /\ w notin NK /\ keys != emptyset}

        for(int i=0; i < keys.length; i++)
            if (w==keys[i]) throw new NotPossibleException("Engine.queryMore");
        //{WORD(w) /\ w notin NK /\ keys != emptyset /\ w notin keys}

        q.addKey(w);
        return q;
    }




    public Query addDocFromFile(String f) throws NotPossibleException, FileNotFoundException,
    DuplicateException {

        //EFFECTS: If f is not a name for a local file (in the same directory) that:
        //   (1) can be opened for reading and
        //   (2) whose contents can be interpreted as a document
        //  then throws NotPossibleException,
        //  else adds the new documents to Doc.
        //  If no query was in progress returns the empty query,
        //  else returns the query result that includes any matching new documents.

        //IMPL SKETCH:
        //open file f for reading
        //read in and construct document d
        //tt.addDoc(d), add d to the title table
        //Hashtable h := wt.addDoc(d) is a hashtable for document d only
        //if q != null then q := q.addDoc(d,h) else q := new Query()
        //return q

        java.io.File docFile = new java.io.File(f);
        Scanner input = new Scanner(docFile);

        String s =  input.useDelimiter("\\A").next();    //read all of Scanner input, since
        // \A is boundary marker for beginning of input

        Doc d = new Doc(s);                //Construct document d corresponding to file f
        tt.addDoc(d);                      //Add d to TitleTable.
        Map h = wt.addDoc(d);              //Add d to WordTable and get hashtable h for d only

        if (q != null) {
            q.addDoc(d,h);      //Update ongoing query q with d
            return q;
        }
        else {
            return(new Query());        //If no ongoing query, return empty query.
        }
    }
}
